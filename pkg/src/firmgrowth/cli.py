"""Command line front end: simulate, analyze, fit, ingest, reproduce.

Configuration comes from an INI file (sections documented in the README);
the --seed / --out-dir / --threads flags override the [run] section.  Exit
codes: 0 success, 1 validation error, 2 runtime error, 3 tolerance check
failed under --strict.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from firmgrowth import __version__, analysis, estimation
from firmgrowth.analysis import DensityEstimate
from firmgrowth.distributions import GseParams, MigParams
from firmgrowth.experiments import EXPERIMENTS, run_experiment
from firmgrowth.model import FixedCount, ModelParams, Panel, ParetoCount, simulate_panel
from firmgrowth import panel as panel_mod

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_STRICT_FAIL = 3


class ValidationError(Exception):
    pass


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def load_config(path):
    cfg = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        read = cfg.read(path)
        if not read:
            raise ValidationError(f"config file not found: {path}")
    return cfg


def config_hash(cfg: configparser.ConfigParser):
    payload = {s: dict(cfg[s]) for s in cfg.sections()}
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _get(cfg, section, key, fallback=None):
    if cfg.has_option(section, key):
        return cfg.get(section, key)
    return fallback


def run_settings(cfg, args):
    """[run] section with CLI flags taking precedence."""
    seed = args.seed if args.seed is not None else _get(cfg, "run", "seed", "20260801")
    out_dir = args.out_dir or _get(cfg, "run", "out_dir", "out")
    threads = args.threads if args.threads is not None else _get(cfg, "run", "threads", "0")
    threads = int(threads)
    if threads <= 0:
        import os

        threads = os.cpu_count() or 1
    return int(seed), Path(out_dir), threads


def model_params_from_config(cfg):
    if not cfg.has_section("model"):
        raise ValidationError("config needs a [model] section")
    sec = cfg["model"]
    mode = sec.get("k_mode", "pareto").strip().lower()
    if mode == "fixed":
        k_mode = FixedCount(sec.getint("k", 1))
        alpha = None
    elif mode == "pareto":
        k_mode = ParetoCount()
        if "alpha" not in sec:
            raise ValidationError("pareto k_mode needs alpha in [model]")
        alpha = sec.getfloat("alpha")
    else:
        raise ValidationError(f"unknown k_mode {mode!r} (use fixed or pareto)")
    try:
        return ModelParams(
            mu=sec.getfloat("mu"),
            alpha=alpha,
            s0=sec.getfloat("s0", 1.0),
            sigma0=sec.getfloat("sigma0", 0.1),
            k_mode=k_mode,
            shock_law=sec.get("shock_law", "gaussian").strip().lower(),
            student_dof=sec.getfloat("student_dof", 5.0),
        )
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc)) from None


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table_csv(path, header, rows, meta=None):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    if meta is not None:
        write_json(Path(str(path) + ".meta.json"), meta)


def write_json(path, payload):
    def default(o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (np.bool_,)):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"cannot serialize {type(o)}")

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=default, allow_nan=True)
        fh.write("\n")


def _meta(cfg, seed, extra=None):
    meta = {"version": __version__, "seed": int(seed), "config_hash": config_hash(cfg)}
    if extra:
        meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg, args):
    seed, out_dir, threads = run_settings(cfg, args)
    params = model_params_from_config(cfg)
    sec = cfg["simulate"] if cfg.has_section("simulate") else {}
    n_firms = int(sec.get("n_firms", "1000"))
    n_periods = int(sec.get("n_periods", "8"))
    if n_firms < 1 or n_periods < 2:
        raise ValidationError("need n_firms >= 1 and n_periods >= 2")

    out_dir.mkdir(parents=True, exist_ok=True)
    panel, info = simulate_panel(params, n_firms, n_periods, seed, threads=threads)
    panel_path = out_dir / "panel.csv"
    panel.write_csv(panel_path)
    meta = _meta(cfg, seed, {
        "params": params.to_dict(),
        "n_firms": n_firms,
        "n_periods": n_periods,
        "clamp_count": info.clamp_count,
    })
    write_json(out_dir / "panel.meta.json", meta)
    print(f"wrote {panel_path} ({panel.n_records} records, clamp_count={info.clamp_count})")
    return EXIT_OK


def cmd_analyze(cfg, args):
    seed, out_dir, _ = run_settings(cfg, args)
    sec = cfg["analyze"] if cfg.has_section("analyze") else {}
    panel_path = args.panel or sec.get("panel")
    if not panel_path or not Path(panel_path).exists():
        raise ValidationError(f"panel file not found: {panel_path!r}")
    n_bins = int(sec.get("n_bins", "25"))
    q_list = [int(q) for q in sec.get("q_list", "1,2,3,4").split(",")]

    panel = Panel.read_csv(panel_path)
    order = np.lexsort((panel.period, panel.firm_id))
    fid, per, siz = panel.firm_id[order], panel.period[order], panel.size[order]
    sizes_mean, vols = [], []
    dropped = 0
    for firm in np.unique(fid):
        m = fid == firm
        s = siz[m][np.argsort(per[m])]
        if s.size < 3:
            dropped += 1
            continue
        growth = s[1:] / s[:-1] - 1.0
        sizes_mean.append(s.mean())
        vols.append(estimation.mad_volatility(growth))
    if len(vols) < n_bins:
        raise ValidationError("not enough firms with >= 3 periods for the requested bins")
    sizes_mean = np.array(sizes_mean)
    vols = np.array(vols)

    out_dir.mkdir(parents=True, exist_ok=True)
    stats = analysis.binned_volatility_moments(sizes_mean, vols, q_list, n_bins=n_bins)
    write_table_csv(
        out_dir / "binned_stats.csv",
        ["bin", "mean_size", "n"] + [f"q{q}" for q in q_list],
        [[b.bin_index, b.mean_size, b.n_firms] + [b.moments[q] for q in q_list] for b in stats],
        meta=_meta(cfg, seed),
    )

    assign = analysis.equal_count_bins(sizes_mean, n_bins)
    rescaled = analysis.rescale_collapse([vols[assign == b] for b in range(n_bins)])
    rows = []
    for b, r in enumerate(rescaled):
        rows.extend([[b, v] for v in r])
    write_table_csv(out_dir / "collapse.csv", ["bin", "rescaled_vol"], rows, meta=_meta(cfg, seed))

    pooled = np.concatenate(rescaled)
    grid = np.linspace(0.0, max(float(np.quantile(pooled, 0.999)) * 1.5, 1.0), 2000)
    dens = analysis.kde_gaussian(pooled, grid)
    write_table_csv(
        out_dir / "rescaled_vol_density.csv",
        ["x", "density"],
        list(zip(dens.grid, dens.values)),
        meta=_meta(cfg, seed),
    )

    profile = estimation.power_law_exponent_profile(sizes_mean, vols, q_list, n_bins=n_bins)
    write_json(
        out_dir / "scaling_fits.json",
        {"_meta": _meta(cfg, seed, {"dropped_firms": dropped}),
         "fits": {str(q): profile[q].to_dict() for q in q_list}},
    )
    write_table_csv(
        out_dir / "exponent_profile.csv",
        ["q", "slope", "se", "r2"],
        [[q, profile[q].slope, profile[q].slope_se, profile[q].r_squared] for q in q_list],
        meta=_meta(cfg, seed),
    )
    print(f"wrote analysis bundle to {out_dir} ({len(vols)} firms, {dropped} dropped)")
    return EXIT_OK


def _read_samples(path):
    rows = Path(path).read_text().strip().splitlines()
    start = 0
    try:
        float(rows[0].split(",")[0])
    except ValueError:
        start = 1
    return np.array([float(r.split(",")[0]) for r in rows[start:]])


def cmd_fit(cfg, args):
    seed, out_dir, _ = run_settings(cfg, args)
    sec = cfg["fit"] if cfg.has_section("fit") else {}
    family = (args.family or sec.get("family", "")).strip().lower()
    input_path = args.input or sec.get("input")
    if family not in ("mig", "gse"):
        raise ValidationError("fit family must be 'mig' or 'gse'")
    if not input_path or not Path(input_path).exists():
        raise ValidationError(f"fit input not found: {input_path!r}")

    if family == "mig":
        samples = _read_samples(input_path)
        init = None
        if sec.get("init_scale"):
            try:
                init = MigParams(
                    float(sec["init_scale"]), float(sec["init_shape"]), float(sec["init_location"])
                )
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"bad mig init bounds: {exc}") from None
        fit = estimation.fit_mig_mle(samples, init=init)
    else:
        data = np.genfromtxt(input_path, delimiter=",", names=True)
        if "x" not in data.dtype.names or "density" not in data.dtype.names:
            raise ValidationError("gse input needs columns x,density")
        dens = DensityEstimate(data["x"], data["density"], bandwidth=0.0, n_samples=0)
        init = None
        if sec.get("init_amplitude"):
            try:
                init = GseParams(
                    float(sec["init_amplitude"]), float(sec["init_core_width"]),
                    float(sec["init_center"]), float(sec["init_crossover"]),
                    float(sec["init_stretch"]),
                )
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"bad gse init bounds: {exc}") from None
        fit = estimation.fit_gse_nls(dens, init=init)

    out_dir.mkdir(parents=True, exist_ok=True)
    out = dict(fit.to_dict())
    out["_meta"] = _meta(cfg, seed, {"family": family})
    path = out_dir / f"fit_{family}.json"
    write_json(path, out)
    print(f"wrote {path} (converged={fit.converged}, objective={fit.objective:.6g})")
    if args.strict and not fit.converged:
        return EXIT_STRICT_FAIL
    return EXIT_OK


def cmd_ingest(cfg, args):
    seed, out_dir, _ = run_settings(cfg, args)
    sec = cfg["ingest"] if cfg.has_section("ingest") else {}
    input_path = args.input or sec.get("input")
    if not input_path or not Path(input_path).exists():
        raise ValidationError(f"ingest input not found: {input_path!r}")
    schema = dict(panel_mod.DEFAULT_SCHEMA)
    for logical in ("firm_id", "year", "quarter", "size", "fiscal_year_end_month"):
        key = f"{logical}_col"
        if sec.get(key):
            schema[logical] = sec[key]

    try:
        observations = panel_mod.ingest_csv(input_path, schema)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    qp = panel_mod.QuarterlyPanel.from_observations(observations)
    if sec.get("deflator"):
        deflator = panel_mod.DeflatorSeries.from_csv(sec["deflator"])
        qp = panel_mod.deflate(qp, deflator)
    if sec.get("normalize", "true").strip().lower() in ("1", "true", "yes"):
        qp = panel_mod.normalize_by_year(qp)
    qp, exclusions = panel_mod.filter_firms(
        qp,
        min_growth_obs=int(sec.get("min_growth_obs", "2")),
        fiscal_december_only=sec.get("fiscal_december_only", "false").strip().lower()
        in ("1", "true", "yes"),
    )
    if qp.n_obs == 0:
        raise ValidationError("no observations survive the filters")

    out_dir.mkdir(parents=True, exist_ok=True)
    growths = panel_mod.annual_log_growth(qp)
    panel_mod.write_growth_csv(growths, out_dir / "growth.csv")
    write_json(Path(str(out_dir / "growth.csv") + ".meta.json"), _meta(cfg, seed))
    panel_mod.write_stats_csv(panel_mod.descriptive_stats(qp), out_dir / "descriptive_stats.csv")
    write_json(
        out_dir / "exclusions.json",
        {"_meta": _meta(cfg, seed), "excluded_firms": exclusions,
         "n_retained_firms": int(np.unique(qp.firm_id).size)},
    )
    print(
        f"wrote growth.csv ({growths.n_obs} growth rates), descriptive_stats.csv,"
        f" exclusions.json ({len(exclusions)} firms excluded) to {out_dir}"
    )
    return EXIT_OK


def cmd_reproduce(cfg, args):
    seed, out_dir, _ = run_settings(cfg, args)
    name = args.experiment
    if name not in EXPERIMENTS:
        raise ValidationError(
            f"unknown experiment {name!r}; available: {', '.join(EXPERIMENTS)}"
        )
    overrides = {}
    if cfg.has_section("reproduce"):
        for key, value in cfg["reproduce"].items():
            try:
                overrides[key] = int(value)
            except ValueError:
                overrides[key] = float(value)
    if args.seed is None and not cfg.has_option("run", "seed"):
        seed = None  # keep the experiment's reference seed

    result = run_experiment(name, seed=seed, **overrides)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = _meta(cfg, result.seed, {"experiment": name})
    for table_name, (header, rows) in result.tables.items():
        write_table_csv(out_dir / f"{name}_{table_name}.csv", header, rows, meta=meta)
    write_json(
        out_dir / f"{name}_result.json",
        {
            "_meta": meta,
            "checks": [c.to_dict() for c in result.checks],
            "scalars": result.scalars,
            "passed": result.passed,
        },
    )
    for line in result.summary_lines():
        print(line)
    verdict = "PASS" if result.passed else "FAIL"
    print(f"verdict: {verdict} (outputs in {out_dir})")
    if args.strict and not result.passed:
        return EXIT_STRICT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser():
    # SUPPRESS keeps a flag parsed before the subcommand from being clobbered
    # by the subparser's defaults; main() backfills anything never set
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--out-dir", help="output directory (overrides config)")
    common.add_argument("--threads", type=int, help="worker pool size (overrides config)")
    common.add_argument("--strict", action="store_true",
                        help="exit 3 when a tolerance check fails")

    parser = argparse.ArgumentParser(
        prog="firmgrowth",
        description="Simulate granular firm-growth models and run the analysis batteries.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="simulate a firm panel to CSV", parents=[common])
    p_analyze = sub.add_parser("analyze", help="binning / collapse / scaling battery",
                               parents=[common])
    p_analyze.add_argument("--panel", help="panel CSV (overrides config)")
    p_fit = sub.add_parser("fit", help="fit a mig or gse family", parents=[common])
    p_fit.add_argument("--family", choices=["mig", "gse"])
    p_fit.add_argument("--input", help="samples CSV (mig) or x,density CSV (gse)")
    p_ingest = sub.add_parser("ingest", help="run the quarterly panel pipeline",
                              parents=[common])
    p_ingest.add_argument("--input", help="quarterly CSV (overrides config)")
    p_repr = sub.add_parser("reproduce", help="run a named desk-scale experiment",
                            parents=[common])
    p_repr.add_argument("experiment", nargs="?", default="",
                        help=f"one of: {', '.join(EXPERIMENTS)}")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "fit": cmd_fit,
    "ingest": cmd_ingest,
    "reproduce": cmd_reproduce,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    # backfill attributes suppressed by the shared flag group or specific to
    # other subcommands
    defaults = {"config": None, "seed": None, "out_dir": None, "threads": None,
                "strict": False, "panel": None, "family": None, "input": None,
                "experiment": None}
    for attr, value in defaults.items():
        if not hasattr(args, attr):
            setattr(args, attr, value)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
