"""Command-line entry point: ``busyloss {simulate,bounds,branching,verify}``.

Exit codes: 0 when every claim passes or is skipped, 1 when any claim
fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .. import analytics, branching, ordering, queue_sim
from ..distributions import classify
from . import config as cfgmod
from .runner import run_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _globals(suppress=False):
    # the subcommand copy must not overwrite values given before the subcommand
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, help="base seed (default: config value or 0)")
    g.add_argument("--reps", type=int, help="replications per estimate")
    g.add_argument("--alpha", type=float, help="confidence parameter for DKW bands and CIs")
    g.add_argument("--out", help="write output here instead of stdout")
    g.add_argument("--format", choices=cfgmod.FORMATS, help="output format")
    g.add_argument("--workers", type=int, help="worker threads (default: $BUSYLOSS_THREADS or all cores)")
    return p


def build_parser():
    common = _globals(suppress=True)
    parser = _Parser(prog="busyloss", description=__doc__.splitlines()[0], parents=[_globals()])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="simulate busy periods of an A/B/1/n queue")
    p.add_argument("--model", required=True, help="TOML file with a [model] table")
    p.add_argument("--n", type=int, nargs="+", default=None, help="buffer sizes (default: model buffer)")
    p.add_argument("--csv", default=None, help="stream per-period records to this CSV file")
    p.add_argument("--event-cap", type=int, default=queue_sim.DEFAULT_EVENT_CAP)

    p = sub.add_parser("bounds", parents=[common], help="print the closed-form bounds")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, nargs="+", default=None)

    p = sub.add_parser("branching", parents=[common], help="sample a comparison branching process")
    p.add_argument("--process", choices=branching.PROCESSES, required=True)
    p.add_argument("--model", default=None, help="model file; supplies r, B, lambda, A, mu")
    p.add_argument("--r", type=float, default=None, help="offspring parameter (geometric-gw only)")
    p.add_argument("--n", type=int, required=True, help="generation")
    p.add_argument("--samples", default=None, help="write the sampled values (one per line) here")

    p = sub.add_parser("verify", parents=[common], help="run an experiment config and report verdicts")
    p.add_argument("--config", required=True)
    p.add_argument("--no-timing", action="store_true", help="omit the timestamp/runtime block")
    return parser


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_verify(args):
    config = cfgmod.load(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.reps is not None:
        config.replications = args.reps
    if args.alpha is not None:
        config.alpha = args.alpha
    fmt = args.format or config.output_format
    out = args.out or config.output_path
    report = run_experiment(config, workers=args.workers, include_timing=not args.no_timing)
    _emit(report.render(fmt), out)
    return EXIT_FAIL if report.failed else EXIT_OK


def _buffers(args, model):
    if args.n is not None:
        return args.n
    if model.buffer is None:
        raise _UsageError("model has an infinite buffer; pass --n")
    return [model.buffer]


def _family_label(model):
    return f"{model.interarrival}/{model.service}/1/n"


def _cmd_bounds(args):
    model = cfgmod.read_model(args.model)
    records = [analytics.bounds_for(model.with_buffer(n)).as_dict() for n in _buffers(args, model)]
    fmt = args.format or "text"
    if fmt == "json":
        _emit(json.dumps({"model": _family_label(model), "bounds": records}, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK
    keys = ["n", "r", "phi", "EL_lower", "EL_upper", "EL_weak", "Enu_lower", "Enu_upper", "ET_lower", "ET_upper"]
    if fmt == "csv":
        rows = [",".join(keys + ["applicability"])]
        rows += [",".join(_cell(r[k]) for k in keys + ["applicability"]) for r in records]
        _emit("\n".join(rows) + "\n", args.out)
        return EXIT_OK
    ca, cb = classify(model.interarrival), classify(model.service)
    lines = [
        f"model {_family_label(model)}  rho={model.rho:.6g}",
        f"interarrival classes {','.join(ca.names())}; service classes {','.join(cb.names())}",
        "",
    ]
    for r in records:
        lines.append(f"n = {r['n']}  ({r['applicability'] or 'no inequality applies'})")
        for k in keys[1:]:
            lines.append(f"  {k:<10} {_cell(r[k]) or '-'}")
        for note in r["notes"]:
            lines.append(f"  # {note}")
    lines.append("")
    lines.append(json.dumps({"model": _family_label(model), "bounds": records}, sort_keys=True))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _cmd_simulate(args):
    model = cfgmod.read_model(args.model)
    seed = args.seed or 0
    reps = args.reps or 100_000
    alpha = args.alpha or 1e-3
    summary = []
    writer = fh = None
    if args.csv:
        fh = open(args.csv, "w", encoding="utf-8", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "rep", "losses", "served", "duration", "truncated"])
    try:
        for n in _buffers(args, model):
            plan = queue_sim.SimulationPlan(model.with_buffer(n), reps, seed, args.event_cap, key=("simulate", n))
            res = queue_sim.run_many(plan, args.workers)
            if writer is not None:
                ok = np.zeros(reps, dtype=bool)
                ok[res.rep_index] = True
                rows = {int(i): k for k, i in enumerate(res.rep_index)}
                for rep in range(reps):
                    if ok[rep]:
                        k = rows[rep]
                        writer.writerow([n, rep, int(res.losses.values[k]), int(res.served.values[k]),
                                         repr(float(res.duration.values[k])), 0])
                    else:
                        writer.writerow([n, rep, "", "", "", 1])
            rec = {"n": n, "replications": reps, "truncated": res.truncation_count}
            for name, s in (("losses", res.losses), ("served", res.served), ("duration", res.duration)):
                m, hw = ordering.mean_ci(s, alpha)
                rec[name] = {"mean": m, "ci_halfwidth": hw}
            if model.service.is_exponential:
                resid = ordering.EmpiricalSample(res.wald_residuals())
                rec["wald_residual"] = {"mean": resid.mean(), "se": ordering.standard_error(resid)}
            summary.append(rec)
    finally:
        if fh is not None:
            fh.close()
    fmt = args.format or "text"
    if fmt == "json":
        text = json.dumps({"model": _family_label(model), "seed": seed, "results": summary}, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        rows = ["n,replications,truncated,mean_losses,mean_served,mean_duration"]
        rows += [f"{s['n']},{s['replications']},{s['truncated']},{s['losses']['mean']!r},"
                 f"{s['served']['mean']!r},{s['duration']['mean']!r}" for s in summary]
        text = "\n".join(rows) + "\n"
    else:
        lines = [f"model {_family_label(model)}  seed={seed}  reps={reps}"]
        for s in summary:
            lines.append(
                f"n={s['n']:<3} E[L]={s['losses']['mean']:.6f}+/-{s['losses']['ci_halfwidth']:.6f}  "
                f"E[nu]={s['served']['mean']:.6f}  E[T]={s['duration']['mean']:.6f}  truncated={s['truncated']}"
            )
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _cmd_branching(args):
    seed = args.seed or 0
    reps = args.reps or 100_000
    alpha = args.alpha or 1e-3
    kw = {}
    model = cfgmod.read_model(args.model) if args.model else None
    if args.process == "geometric-gw":
        if args.r is not None:
            kw["r"] = args.r
        elif model is not None:
            kw["r"] = analytics.compute_r(model.interarrival, model.service)
        else:
            raise _UsageError("geometric-gw needs --r or --model")
    elif model is None:
        raise _UsageError(f"{args.process} needs --model")
    elif args.process == "compound":
        kw.update(r=1.0 - model.service.lst(model.lam), B=model.service, lam=model.lam)
    else:
        kw.update(A=model.interarrival, mu=model.mu)
    sample = branching.sample_many(args.process, args.n, reps, seed, ("branching",), args.workers, **kw)
    if args.samples:
        np.savetxt(args.samples, sample.values, fmt="%d")
    m, hw = ordering.mean_ci(sample, alpha)
    rec = {"process": args.process, "generation": args.n, "replications": reps, "seed": seed,
           "mean": m, "ci_halfwidth": hw, "truncated": sample.truncation_count,
           "parameters": {k: (v if isinstance(v, (int, float)) else str(v)) for k, v in kw.items()}}
    if args.process == "geometric-gw":
        rec["expected_mean"] = analytics.gw_mean(kw["r"], args.n)
    elif args.process == "compound":
        rec["expected_mean"] = analytics.expected_tau_sum(kw["r"], kw["B"], kw["lam"], args.n)
    else:
        rec["expected_mean"] = analytics.solve_phi(kw["A"], kw["mu"]) ** args.n
    fmt = args.format or "text"
    if fmt == "json":
        text = json.dumps(rec, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        text = "process,generation,replications,mean,ci_halfwidth,expected_mean\n"
        text += f"{args.process},{args.n},{reps},{m!r},{hw!r},{rec['expected_mean']!r}\n"
    else:
        text = (f"{args.process} generation {args.n}: mean {m:.6f} +/- {hw:.6f} "
                f"(expected {rec['expected_mean']:.6f}, {reps} samples, seed {seed})\n")
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {"simulate": _cmd_simulate, "bounds": _cmd_bounds, "branching": _cmd_branching, "verify": _cmd_verify}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except cfgmod.ConfigError as exc:
        print(f"busyloss: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"busyloss: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
