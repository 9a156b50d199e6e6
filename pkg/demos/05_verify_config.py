"""
Running an experiment config
============================

The harness reads a TOML file naming a model, buffer sizes and claims,
checks which claims apply to the model, and reports a verdict for each.
Same config and seed, same report bytes.
"""

import pathlib

from busyloss import harness

here = pathlib.Path(__file__).parent / "configs"

for name in ("mm1.toml", "dm1.toml", "skips.toml"):
    cfg = harness.load(here / name)
    cfg.replications = 20_000
    report = harness.run_experiment(cfg, include_timing=False)
    print(report.to_text(include_timing=False))

# the command line does the same: busyloss verify --config demos/configs/dm1.toml --no-timing
