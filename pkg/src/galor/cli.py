"""Command-line interface: simulate, fit, compare, effects, dist."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, gal
from .evaluation import FitSummary, compare_models, covariate_effect, fit_summary
from .io import DataError, RunManifest, atomic_write_text, fmt, load_dataset, read_chain, save_dataset, write_chain
from .mcmc import TUNING_PRESETS, McmcError, ModelConfig, TuningConfig, estimate_proposal_covariances, preset_tuning, run_bqror, run_chain
from .random_kit import VanishingRegionError, make_rng
from .simulate import STUDY1, STUDY2, generate

log = logging.getLogger("galor")

RUNTIME_ERRORS = (McmcError, DataError, VanishingRegionError, OSError, ValueError, RuntimeError)

# fit settings: name -> (type, default); precedence is default < config file < flag
FIT_SETTINGS = {
    "data": (str, None),
    "quantile": ("floats", [0.25, 0.5, 0.75]),
    "model": (str, "fbqror"),
    "draws": (int, 15000),
    "burnin": (int, 5000),
    "cut2": (float, 2.0),
    "iota1": (float, None),
    "iota2": (float, None),
    "preset": (str, None),
    "seed": (int, 0),
    "out_dir": (str, "galor_fit"),
    "jobs": (int, 1),
    "intercept": ("bool", False),
    "y_column": (str, "y"),
    "latent_update": (str, "joint"),
}


class UsageError(Exception):
    pass


def _parse_value(name: str, raw: str):
    kind = FIT_SETTINGS[name][0]
    try:
        if kind == "floats":
            return [float(v) for v in raw.replace(",", " ").split()]
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw.strip())
    except ValueError:
        raise UsageError(f"config: bad value {raw!r} for '{name}'") from None


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use the long flag names."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIT_SETTINGS:
            raise UsageError(f"config line {lineno}: unknown key '{key}'")
        out[key] = _parse_value(key, raw)
    return out


def resolve_fit_settings(args: argparse.Namespace) -> dict:
    settings = {k: v[1] for k, v in FIT_SETTINGS.items()}
    if args.config:
        settings.update(read_config(args.config))
    for k in FIT_SETTINGS:
        v = getattr(args, k, None)
        if v is not None:
            settings[k] = v
    if not settings["data"]:
        raise UsageError("fit: --data is required (flag or config file)")
    for q in settings["quantile"]:
        if not 0.0 < q < 1.0:
            raise UsageError(f"quantile must be in (0,1), got {q}")
    if settings["model"] not in ("fbqror", "bqror", "both"):
        raise UsageError("model must be fbqror, bqror or both")
    if settings["draws"] <= 0 or settings["burnin"] < 0:
        raise UsageError("need draws > 0 and burnin >= 0")
    if settings["cut2"] <= 0:
        raise UsageError("cut2 must be positive")
    for name in ("iota1", "iota2"):
        if settings[name] is not None and settings[name] <= 0:
            raise UsageError(f"{name} must be positive")
    if settings["latent_update"] not in ("joint", "sequential"):
        raise UsageError("latent_update must be joint or sequential")
    if settings["preset"] is not None and settings["preset"] not in TUNING_PRESETS:
        raise UsageError(f"unknown preset {settings['preset']!r}; choose from {sorted(TUNING_PRESETS)}")
    if settings["jobs"] < 1:
        raise UsageError("jobs must be >= 1")
    return settings


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    design = {1: STUDY1, 2: STUDY2}[args.study]
    rng = make_rng(args.seed, "data")
    data, z = generate(design, args.n, rng)
    manifest = RunManifest("simulate", sys.argv[1:] if args.argv is None else args.argv, vars_clean(args), args.seed, __version__)
    save_dataset(data, args.out, {"z": z} if args.latent else None)
    manifest.outputs.append(str(args.out))
    manifest.finish(Path(args.out).with_suffix(".manifest.json"))
    counts = data.counts()
    shares = ", ".join(f"{c} ({100 * c / data.n:.2f}%)" for c in counts)
    print(f"wrote {args.out}: n={data.n}, k={data.k}, J={data.J}, categories {shares}")
    return 0


def _fit_one(task: dict) -> dict:
    data = load_dataset(task["data"], task["y_column"], task["intercept"])
    model, p0 = task["model"], task["p0"]
    iota1, iota2 = (1.0, 1.0) if task["preset"] is None else preset_tuning(task["preset"], p0)
    iota1 = task["iota1"] if task["iota1"] is not None else iota1
    iota2 = task["iota2"] if task["iota2"] is not None else iota2
    tuning = TuningConfig(iota1=iota1, iota2=iota2, draws=task["draws"], burnin=task["burnin"], seed=task["seed"])
    config = ModelConfig(p0=p0, c=task["cut2"], model=model, tuning=tuning, latent_update=task["latent_update"])
    rng = make_rng(task["seed"], f"chain/{model}/{p0:.6g}")
    proposal = estimate_proposal_covariances(data, p0, config.c, sample_gamma=(model == "fbqror"))
    runner = run_chain if model == "fbqror" else run_bqror
    chain = runner(data, config, rng=rng, proposal=proposal)
    out_dir = Path(task["out_dir"])
    stem = f"{model}_p{p0:g}"
    chain_path = out_dir / f"chain_{stem}.csv"
    write_chain(chain, chain_path)
    summary = fit_summary(chain, data)
    info = summary.to_dict()
    info["iota1"], info["iota2"] = iota1, iota2
    info["seconds"] = chain.seconds
    info["proposal_D1"] = np.asarray(proposal.D1).tolist()
    info["proposal_D2"] = np.asarray(proposal.D2).tolist()
    summary_path = out_dir / f"summary_{stem}.json"
    atomic_write_text(summary_path, json.dumps(_clean(info), indent=2) + "\n")
    return {"summary": info, "outputs": [str(chain_path), str(chain_path.with_suffix(".meta.json")), str(summary_path)]}


def format_summary(info: dict) -> str:
    lines = [f"[{info['model']}] p0 = {info['p0']:.2f}"]
    for name, m in info["mean"].items():
        if info["model"] == "bqror" and name == "gamma":
            continue
        sd = info["sd"].get(name)
        ineff = info.get("inefficiency", {}).get(name)
        sd_txt = f"{sd:.2f}" if sd is not None and math.isfinite(sd) else "nan"
        if_txt = f"{ineff:.2f}" if ineff is not None and math.isfinite(ineff) else "-"
        lines.append(f"  {name:<10} {m:>8.2f} ({sd_txt})  IF {if_txt}")
    lines.append(f"  skewness   {info['skewness']:>8.2f}")
    lines.append(
        f"  accept sigma/gamma {info['accept_sigma_gamma']:.2f}  delta "
        + (f"{info['accept_delta']:.2f}" if info["accept_delta"] is not None and math.isfinite(info["accept_delta"]) else "-")
    )
    lines.append(f"  lnL {info['loglik']:.2f}  AIC {info['aic']:.2f}  BIC {info['bic']:.2f}  ({info['seconds']:.1f}s)")
    return "\n".join(lines)


def cmd_fit(args) -> int:
    settings = resolve_fit_settings(args)
    # validate the dataset before launching any chain
    load_dataset(settings["data"], settings["y_column"], settings["intercept"])
    models = ["fbqror", "bqror"] if settings["model"] == "both" else [settings["model"]]
    out_dir = Path(settings["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("fit", args.argv if args.argv is not None else sys.argv[1:], settings, settings["seed"], __version__)
    tasks = [dict(settings, model=m, p0=q) for m in models for q in settings["quantile"]]
    if settings["jobs"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=settings["jobs"]) as pool:
            results = list(pool.map(_fit_one, tasks))
    else:
        results = [_fit_one(t) for t in tasks]
    infos = [r["summary"] for r in results]
    for r in results:
        manifest.outputs.extend(r["outputs"])
    text = "\n\n".join(format_summary(i) for i in infos)
    if len(models) == 2:
        blocks = []
        for q in settings["quantile"]:
            group = [FitSummary.from_dict(_restore(i)) for i in infos if math.isclose(i["p0"], q)]
            blocks.append(compare_models(group).text())
        text += "\n\nmodel comparison\n" + "\n\n".join(blocks)
    atomic_write_text(out_dir / "summary.txt", text + "\n")
    rows = ["model,p0,parameter,mean,sd,inefficiency"]
    for i in infos:
        for name, m in i["mean"].items():
            sd = i["sd"].get(name)
            ineff = i.get("inefficiency", {}).get(name)
            rows.append(
                f"{i['model']},{fmt(i['p0'])},{name},{fmt(m)},{fmt(sd if sd is not None else math.nan)},"
                f"{fmt(ineff if ineff is not None else math.nan)}"
            )
        for key in ("loglik", "aic", "bic", "skewness", "accept_sigma_gamma", "accept_delta"):
            v = i[key]
            rows.append(f"{i['model']},{fmt(i['p0'])},{key},{fmt(v if v is not None else math.nan)},,")
    atomic_write_text(out_dir / "summary.csv", "\n".join(rows) + "\n")
    manifest.outputs.extend([str(out_dir / "summary.txt"), str(out_dir / "summary.csv")])
    manifest.finish(out_dir / "manifest.json")
    print(text)
    return 0


def cmd_compare(args) -> int:
    summaries = []
    for path in args.summaries:
        try:
            summaries.append(FitSummary.from_dict(_restore(json.loads(Path(path).read_text()))))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: not a fit summary ({exc})") from None
    groups: dict[float, list[FitSummary]] = {}
    for s in summaries:
        groups.setdefault(round(s.p0, 12), []).append(s)
    texts, csvs = [], []
    for q in sorted(groups):
        report = compare_models(groups[q])
        texts.append(report.text())
        csvs.append(report.csv())
    print("\n\n".join(texts))
    if args.csv:
        body = csvs[0] + "".join(c.split("\n", 1)[1] for c in csvs[1:])
        atomic_write_text(args.csv, body)
    return 0


def cmd_effects(args) -> int:
    chain = read_chain(args.chain)
    data = load_dataset(args.data, args.y_column, args.intercept)
    if data.J != chain.J:
        raise DataError(f"dataset has J={data.J} but the chain was fitted with J={chain.J}")
    effect = covariate_effect(chain, data, args.covariate, tuple(args.values))
    print(effect.text())
    print("category,delta_p")
    for j, v in enumerate(effect.delta_p, start=1):
        print(f"{j},{fmt(v)}")
    return 0


def cmd_dist(args) -> int:
    try:
        lo, hi, num = args.grid.split(":")
        grid = np.linspace(float(lo), float(hi), int(num))
    except ValueError:
        raise UsageError("--grid must look like lo:hi:count") from None
    try:
        q = gal.QuantileGalParams(args.mu, args.sigma, args.gamma, args.p0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    m = gal.moments(q)
    mc = q.constants
    L, U = gal.gamma_bounds(args.p0)
    print(f"# p={fmt(mc.p)} alpha={fmt(mc.alpha)} L={fmt(L)} U={fmt(U)}")
    print(f"# mean={fmt(m.mean)} variance={fmt(m.variance)} skewness={fmt(m.skewness)}")
    print("y,pdf,cdf")
    for y, d, F in zip(grid, gal.pdf(grid, q), gal.cdf(grid, q)):
        print(f"{fmt(y)},{fmt(d)},{fmt(F)}")
    return 0


# ---------------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _restore(d: dict) -> dict:
    """None back to NaN for numeric fields read from JSON."""
    out = dict(d)
    for key in ("accept_sigma_gamma", "accept_delta", "skewness"):
        if out.get(key) is None:
            out[key] = math.nan
    for key in ("mean", "sd", "inefficiency"):
        if key in out:
            out[key] = {k: (math.nan if v is None else v) for k, v in out[key].items()}
    return out


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "argv")}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="galor", description=__doc__)
    p.add_argument("--version", action="version", version=f"galor {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a simulation-study dataset")
    s.add_argument("--study", type=int, choices=(1, 2), required=True)
    s.add_argument("--n", type=int, default=300)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--latent", action="store_true", help="also write the latent z column")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="run FBQROR and/or BQROR chains")
    f.add_argument("--config", help="key = value settings file (flags take precedence)")
    f.add_argument("--data")
    f.add_argument("--quantile", type=float, nargs="+")
    f.add_argument("--model", choices=("fbqror", "bqror", "both"))
    f.add_argument("--draws", type=int)
    f.add_argument("--burnin", type=int)
    f.add_argument("--cut2", type=float, help="fixed second cut-point c")
    f.add_argument("--iota1", type=float, help="(sigma, gamma) proposal scale")
    f.add_argument("--iota2", type=float, help="cut-point proposal scale")
    f.add_argument("--preset", help="tuning preset: study1, study2 or application")
    f.add_argument("--seed", type=int)
    f.add_argument("--out-dir", dest="out_dir")
    f.add_argument("--jobs", type=int)
    f.add_argument("--intercept", action="store_const", const=True, help="prepend an intercept column")
    f.add_argument("--y-column", dest="y_column")
    f.add_argument("--latent-update", dest="latent_update", choices=("joint", "sequential"))
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("compare", help="AIC/BIC comparison of fit summaries")
    c.add_argument("--summaries", nargs="+", required=True)
    c.add_argument("--csv")
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("effects", help="average change in predicted category probabilities")
    e.add_argument("--chain", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--covariate", required=True)
    e.add_argument("--values", type=float, nargs=2, default=(0.0, 1.0))
    e.add_argument("--intercept", action="store_true")
    e.add_argument("--y-column", dest="y_column", default="y")
    e.set_defaults(func=cmd_effects)

    d = sub.add_parser("dist", help="evaluate the quantile-fixed GAL density and cdf on a grid")
    d.add_argument("--p0", type=float, required=True)
    d.add_argument("--gamma", type=float, required=True)
    d.add_argument("--mu", type=float, default=0.0)
    d.add_argument("--sigma", type=float, default=1.0)
    d.add_argument("--grid", default="-5:5:101")
    d.set_defaults(func=cmd_dist)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = list(argv) if argv is not None else None
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"galor: error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"galor: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
