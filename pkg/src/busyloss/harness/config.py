"""Experiment configuration files (TOML).

Example::

    seed = 42
    replications = 100000
    alpha = 0.001
    n_values = [0, 1, 2]
    claims = ["gw-lower", "gim1-upper", "two-sided"]

    [model.interarrival]
    family = "deterministic"
    value = 1.0

    [model.service]
    family = "exponential"
    rate = 1.25

    [output]
    path = "report.json"
    format = "json"
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import Optional

from ..analytics import SystemModel
from ..distributions import DistributionSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CLAIMS = (
    "gw-lower",
    "gw-upper",
    "compound",
    "gim1-upper",
    "two-sided",
    "lemma-4.1-monotonicity",
    "wald-consistency",
    "mean-bounds",
)
FORMATS = ("json", "csv", "text")
DEFAULT_ALPHA = 1e-3
DEFAULT_REPLICATIONS = 100_000


class ConfigError(ValueError):
    """Malformed configuration; the message starts with ``path:line:``."""


@dataclass
class ExperimentConfig:
    model: SystemModel
    n_values: list
    claims: list
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    alpha: float = DEFAULT_ALPHA
    output_path: Optional[str] = None
    output_format: str = "json"
    event_cap: int = 10**7
    source: str = "<config>"
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "interarrival": self.model.interarrival.to_dict(),
            "service": self.model.service.to_dict(),
            "n_values": list(self.n_values),
            "claims": list(self.claims),
            "replications": self.replications,
            "seed": self.seed,
            "alpha": self.alpha,
        }


def _line_of(text, key):
    pat = re.compile(rf"^[ \t]*(\[.*\b{re.escape(key)}\b.*\]|\"?{re.escape(key)}\"?\s*=)", re.M)
    m = pat.search(text)
    if m is None:
        m = re.search(re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _fail(source, text, key, message):
    raise ConfigError(f"{source}:{_line_of(text, key)}: {message}")


def parse_model(data, source="<model>", text=""):
    """Build a :class:`SystemModel` from a ``model`` table (or a document holding one)."""
    table = data.get("model", data)
    if not isinstance(table, dict):
        _fail(source, text, "model", "'model' must be a table")
    specs = {}
    for key in ("interarrival", "service"):
        if key not in table:
            _fail(source, text, "model", f"model is missing the [{key}] table")
        try:
            specs[key] = DistributionSpec.from_dict(table[key])
        except (ValueError, TypeError) as exc:
            _fail(source, text, key, f"bad {key} distribution: {exc}")
    buffer = table.get("buffer", 0)
    if buffer == "infinite":
        buffer = None
    try:
        return SystemModel(specs["interarrival"], specs["service"], buffer)
    except ValueError as exc:
        _fail(source, text, "buffer", str(exc))


def loads_document(text, source="<config>"):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        line = m.group(1) if m else "1"
        raise ConfigError(f"{source}:{line}: {exc}") from None


def read_model(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_model(loads_document(text, str(path)), str(path), text)


def loads(text, source="<config>"):
    data = loads_document(text, source)
    model = parse_model(data, source, text)

    def need(key, kind, default=None, check=None):
        value = data.get(key, default)
        if value is None:
            _fail(source, text, key, f"missing required key {key!r}")
        if not isinstance(value, kind) or isinstance(value, bool):
            _fail(source, text, key, f"{key!r} has the wrong type ({type(value).__name__})")
        if check is not None and not check(value):
            _fail(source, text, key, f"invalid value for {key!r}: {value!r}")
        return value

    n_values = need("n_values", list, check=lambda v: len(v) > 0)
    for n in n_values:
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            _fail(source, text, "n_values", f"n_values entries must be nonnegative integers, got {n!r}")
    claims = need("claims", list, check=lambda v: len(v) > 0)
    for c in claims:
        if c not in CLAIMS:
            _fail(source, text, str(c), f"unknown claim {c!r}; expected one of {', '.join(CLAIMS)}")
    if len(set(claims)) != len(claims):
        _fail(source, text, "claims", "claims must not repeat")
    reps = need("replications", int, DEFAULT_REPLICATIONS, lambda v: v >= 2)
    seed = need("seed", int, 0, lambda v: 0 <= v < 2**64)
    alpha = need("alpha", (int, float), DEFAULT_ALPHA, lambda v: 0 < v < 1)
    event_cap = need("event_cap", int, 10**7, lambda v: v >= 1)
    out = data.get("output", {})
    if not isinstance(out, dict):
        _fail(source, text, "output", "'output' must be a table")
    fmt = out.get("format", "json")
    if fmt not in FORMATS:
        _fail(source, text, "format", f"output format must be one of {FORMATS}, got {fmt!r}")
    known = {"model", "n_values", "claims", "replications", "seed", "alpha", "event_cap", "output"}
    for key in data:
        if key not in known:
            _fail(source, text, key, f"unknown key {key!r}")
    return ExperimentConfig(
        model=model,
        n_values=sorted(set(n_values)),
        claims=list(claims),
        replications=reps,
        seed=seed,
        alpha=float(alpha),
        output_path=out.get("path"),
        output_format=fmt,
        event_cap=event_cap,
        source=source,
    )


def load(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads(text, str(path))
