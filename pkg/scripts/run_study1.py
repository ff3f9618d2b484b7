"""Skew-free simulation design: FBQROR table plus FBQROR vs BQROR comparison.

    python scripts/run_study1.py --seed 7 --draws 15000 --burnin 5000
"""

import argparse

from galor.evaluation import compare_models, fit_summary
from galor.mcmc import ModelConfig, TuningConfig, estimate_proposal_covariances, preset_tuning, run_bqror, run_chain
from galor.random_kit import make_rng
from galor.simulate import STUDY1, generate_study1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--quantiles", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    ap.add_argument("--draws", type=int, default=15000)
    ap.add_argument("--burnin", type=int, default=5000)
    args = ap.parse_args()

    data, _ = generate_study1(args.n, args.seed)
    counts = data.counts()
    print("categories: " + ", ".join(f"{c} ({100 * c / data.n:.0f}%)" for c in counts))
    for p0 in args.quantiles:
        iota1, iota2 = preset_tuning("study1", p0)
        fits = []
        for model, runner in (("fbqror", run_chain), ("bqror", run_bqror)):
            cfg = ModelConfig(p0=p0, c=STUDY1.c, model=model, tuning=TuningConfig(iota1, iota2, args.draws, args.burnin, args.seed))
            prop = estimate_proposal_covariances(data, p0, STUDY1.c, sample_gamma=(model == "fbqror"))
            chain = runner(data, cfg, rng=make_rng(args.seed, f"chain/{model}/{p0:g}"), proposal=prop)
            s = fit_summary(chain, data)
            fits.append(s)
            if model == "fbqror":
                print(f"\np0 = {p0:.2f}  ({chain.seconds / (args.draws + args.burnin) * 1000:.1f}s per 1000 iterations)")
                print(f"  {'param':<8} {'mean':>7} {'sd':>6} {'IF':>6}")
                for name in chain.parameter_names():
                    print(f"  {name:<8} {s.mean[name]:>7.2f} {s.sd[name]:>6.2f} {s.inefficiency.get(name, float('nan')):>6.2f}")
                print(f"  skewness {s.skewness:.2f}; acceptance {s.accept_sigma_gamma:.2f} / {s.accept_delta:.2f}")
        print(compare_models(fits).text())


if __name__ == "__main__":
    main()
