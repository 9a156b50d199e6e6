"""Report container and its JSON, CSV and text renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional


@dataclass
class Report:
    entries: list
    meta: dict
    timing: Optional[dict] = None

    @property
    def failed(self):
        return any(e["status"] == "fail" for e in self.entries)

    def summary(self):
        counts = {"pass": 0, "fail": 0, "skip": 0}
        for e in self.entries:
            counts[e["status"]] += 1
        return counts

    def as_dict(self, include_timing=True):
        d = {"meta": self.meta, "summary": self.summary(), "entries": self.entries}
        if include_timing and self.timing is not None:
            d["timing"] = self.timing
        return d

    def to_json(self, include_timing=True):
        return json.dumps(self.as_dict(include_timing), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_csv(self, include_timing=True):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["claim", "n", "status", "unreliable", "mean_L", "se_L", "checks_ok", "verdicts", "reason"])
        for e in self.entries:
            L = next((e["means"][k] for k in ("L", "EL", "d", "wald_residual") if k in e["means"]), {})
            verdicts = ";".join(f"{v['claim']}:{v['decision']}" for v in e["verdicts"])
            checks = all(c["ok"] for c in e["checks"]) if e["checks"] else ""
            w.writerow([e["claim"], e["n"], e["status"], e["unreliable"], _fmt(L.get("mean")), _fmt(L.get("se")),
                        checks, verdicts, e["reason"]])
        if include_timing and self.timing is not None:
            w.writerow(["# timing", self.timing["timestamp"], self.timing["runtime_s"]])
        return buf.getvalue()

    def to_text(self, include_timing=True):
        lines = [
            f"model   {self.meta['model']}  (rho={self.meta['rho']:.6g})",
            f"seed    {self.meta['seed']}   truncated periods: {self.meta['truncations']}",
            "",
            f"{'claim':<24}{'n':>3}  {'status':<7}{'estimate':>22}  detail",
            "-" * 96,
        ]
        for e in self.entries:
            status = e["status"] + ("*" if e["unreliable"] else "")
            est = ""
            for key in ("L", "EL", "d", "wald_residual"):
                if key in e["means"]:
                    m = e["means"][key]
                    est = f"{m['mean']:.5f} +/- {3 * m['se']:.5f}"
                    break
            details = []
            for c in e["checks"]:
                if "bound" in c:
                    op = ">=" if c.get("side") == "lower" else "<="
                    if c.get("side") is None:
                        op = "~"
                    details.append(f"{c['name']} {op} {c['bound']:.5g}: {'ok' if c['ok'] else 'FAIL'}")
                else:
                    details.append(f"{c['name']}: {'ok' if c['ok'] else 'FAIL'}")
            for v in e["verdicts"]:
                details.append(f"{v['claim']}: {v['decision']} (excess {v['max_violation']:+.4f})")
            if e["reason"]:
                details.append(e["reason"])
            lines.append(f"{e['claim']:<24}{e['n']:>3}  {status:<7}{est:>22}  {'; '.join(details)}")
        s = self.summary()
        lines += ["", f"pass {s['pass']}  fail {s['fail']}  skip {s['skip']}   (* = truncation rate above 1%)"]
        if include_timing and self.timing is not None:
            lines.append(f"timing  {self.timing['timestamp']}  {self.timing['runtime_s']} s")
        return "\n".join(lines) + "\n"

    def render(self, fmt="json", include_timing=True):
        if fmt == "json":
            return self.to_json(include_timing)
        if fmt == "csv":
            return self.to_csv(include_timing)
        if fmt == "text":
            return self.to_text(include_timing)
        raise ValueError(f"unknown format {fmt!r}")


def _fmt(x):
    return "" if x is None else repr(float(x))


def strip_timing(text, fmt="json"):
    """Drop the volatile timing block so two renderings can be compared byte for byte."""
    if fmt == "json":
        d = json.loads(text)
        d.pop("timing", None)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    prefix = "# timing" if fmt == "csv" else "timing "
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith(prefix))
