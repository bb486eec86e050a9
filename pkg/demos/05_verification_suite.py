"""
The verification suite, end to end
===================================

The same criteria the test gate enforces can be run programmatically: an
exact-arithmetic oracle for every derived constant, grid-convergence
checks, conservation with the reaction switched off, invariance of the
synchronized manifold, envelope and energy-inequality monitors along
random runs, the coupling sweep, the boundary cross-term probe,
determinism, and the asynchronous-degree estimator.

Expect roughly half a minute: the coupling sweep integrates five runs to
t = 200.
"""

import pathlib
import sys

from hrnet.config import load_config
from hrnet.verify import format_result, run_all

# 1. the stock configuration that ships with the repository
config_path = pathlib.Path(__file__).resolve().parents[1] / "configs" / "default.ini"
cfg = load_config(config_path)
print(f"config: {config_path}")
print(f"domain: {cfg.domain.dim}D, {cfg.domain.n_cells} cells, "
      f"N = {cfg.params.n_neurons}\n")

# 2. run every criterion and print one line per result
results = run_all(cfg, jobs=1)
for result in results:
    print(format_result(result))

# 3. the exit status mirrors the CLI: nonzero when anything failed
failed = [r for r in results if not r.passed]
print(f"\n{len(results) - len(failed)} of {len(results)} criteria passed")
sys.exit(0 if not failed else 4)
