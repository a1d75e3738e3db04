"""Staged fit (monoexponential, fractional, tempered) of a synthetic relaxation curve."""

from __future__ import annotations

import numpy as np

from tempfrac.fitting import SignalModel, eval_model, fit_staged


def main() -> None:
    rng = np.random.default_rng(1)
    t = np.linspace(0.0, 200.0, 101)
    truth = SignalModel("tempered", (80.0, 40.0, 2.0, 0.8, 0.005, 0.05))
    y = eval_model(truth, t) + 0.01 * 82.0 * rng.standard_normal(t.size)
    for kind, res in fit_staged(t, y).items():
        params = ", ".join(f"{k}={v:.4g}" for k, v in res.params.items())
        print(f"{kind:>10}: mse={res.mse:.4g}  {params}")


if __name__ == "__main__":
    main()
