"""TTC distribution vs entry intensity: identity without process noise.

With the jerk noise and deterministic input switched off, each trajectory
crosses the boundary at a time fixed by its initial state, so the
time-to-collision histogram must reproduce the entry-intensity curve.
Adding process noise spreads the predicted density and pulls the
intensity peak to an earlier time than the TTC peak.
"""
import dataclasses

import numpy as np

from crossrate import (
    GaussianDensity,
    predict_density,
    preset_config,
    total_intensity,
    ttc_monte_carlo,
)


def main():
    base = preset_config("front-right", n_traj=50_000, bin_width=0.2)
    p0 = base.resolve_initial_cov()
    quiet = dataclasses.replace(
        base,
        model=dataclasses.replace(base.model, qx=0.0, qy=0.0, input_enabled=False),
        initial_cov=p0,
    )

    ttc = ttc_monte_carlo(quiet)
    rate = ttc["front_rate"] + ttc["right_rate"]
    edges = ttc["bin_edges"]
    mids = 0.5 * (edges[:-1] + edges[1:])

    g0 = GaussianDensity(quiet.initial_mean.as_array(), p0)

    def mu(cfg, t):
        return total_intensity(
            predict_density(g0, float(t), cfg.model), cfg.rect, float(t)
        ).mu_plus

    mu_quiet = np.array([mu(quiet, t) for t in mids])
    dev = np.abs(rate - mu_quiet).max() / mu_quiet.max()
    print(f"zero-noise: max |TTC histogram - intensity| = "
          f"{100 * dev:.1f}% of peak")
    print(f"  TTC peak      : {mids[np.argmax(rate)]:.2f} s")
    print(f"  intensity peak: {mids[np.argmax(mu_quiet)]:.2f} s")

    noisy = dataclasses.replace(
        quiet, model=dataclasses.replace(quiet.model, qx=1.0125, qy=1.0125)
    )
    mu_noisy = np.array([mu(noisy, t) for t in mids])
    print(f"with jerk PSD 1.0125 m^2 s^-5 the intensity peak moves to "
          f"{mids[np.argmax(mu_noisy)]:.2f} s — earlier than the TTC peak")


if __name__ == "__main__":
    main()
