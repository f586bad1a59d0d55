"""
Command-line front end.

    legitgxe fit      --input data.csv --outcome y --genes g1,g2 --envs e1
    legitgxe classify --input data.csv --outcome y --genes g1 --envs e1 --bounds expected
    legitgxe ros      --input data.csv --outcome y --genes g1 --envs e1 --alpha .05
    legitgxe simulate --setting single --replicates 20 --output results.csv
    legitgxe pomp     --input data.csv --columns e1,e2 --output scaled.csv

Options may also come from an INI file (``--config``) with one section per
command; flags given on the command line win.  Exit codes: 0 success,
2 input error, 3 fit failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
import warnings
from pathlib import Path

import numpy as np

from .competitive import TABLE_COLUMNS, classify, fit_competitive_set, table_cells
from .ingest import InputError, ingest_csv, pomp_rescale, read_table
from .legit import CrossoverDivergedError, GxEDataset, fit_legit
from .ros import regions_of_significance
from .simulation import METHODS, export_long, export_results, study_grid, run_study
from .stats_core import DimensionError, RankDeficientError

EXIT_OK, EXIT_INPUT, EXIT_FIT, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("fit", "classify", "ros", "simulate", "pomp")


def _csv_list(text):
    if text is None or text == "":
        return []
    if isinstance(text, (list, tuple)):
        return list(text)
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _fmt(x, digits=6):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{x:.{digits}g}"
    return str(x)


def _add_data_args(p):
    p.add_argument("--input", help="delimited text file with a header row")
    p.add_argument("--outcome", default="y")
    p.add_argument("--genes", help="comma-separated gene columns")
    p.add_argument("--envs", help="comma-separated environment columns")
    p.add_argument("--covariates", default="", help="comma-separated covariate columns")
    p.add_argument("--pomp", action="store_true", help="POMP-rescale the environments to [0, 100] first")
    p.add_argument("--env-range", help="theoretical LO,HI of every environment variable")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--output", help="write the report table here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="legitgxe", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="INI file with one section per command")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one LEGIT model")
    _add_data_args(p)
    p.add_argument("--crossover", default="none", help="'none', 'free' or a fixed value")
    p.add_argument("--strong", action="store_true", help="fix the environment main effect at zero")

    p = sub.add_parser("classify", help="competitive-confirmatory classification")
    _add_data_args(p)
    p.add_argument("--bounds", choices=("expected", "observed"), default="expected")
    p.add_argument("--no-null-models", action="store_true")

    p = sub.add_parser("ros", help="regions of significance")
    _add_data_args(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--df-convention", choices=("residual", "reduced"), default="residual")

    p = sub.add_parser("simulate", help="run the accuracy study")
    p.add_argument("--setting", choices=("single", "multi"), default="single")
    p.add_argument("--sample-sizes", default="250,500,1000,2000")
    p.add_argument("--effect-sizes", default="small,medium,large")
    p.add_argument("--families", default="2:0.5,2:0.25,4:0.5,4:0.25",
                   help="comma-separated envBeta:crossover pairs")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--bounds", choices=("expected", "observed"), default="expected")
    p.add_argument("--no-null-models", action="store_true")
    p.add_argument("--output", default="simulation_results.csv")
    p.add_argument("--long-output", help="plot-ready long table (default: <output>_long.csv)")

    p = sub.add_parser("pomp", help="POMP-rescale columns of a file")
    p.add_argument("--input", required=False)
    p.add_argument("--columns", help="comma-separated columns to rescale")
    p.add_argument("--env-range", help="theoretical LO,HI for the rescaled columns")
    p.add_argument("--output")
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the config file section of the command."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = configparser.ConfigParser()
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {args.config}: {exc}") from exc
    if not cfg.has_section(args.command):
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items(args.command):
        dest = key.replace("-", "_")
        if dest not in known:
            raise InputError(f"config section [{args.command}] has unknown key {key!r}")
        action = known[dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = cfg.getboolean(args.command, key)
        elif action.type is not None:
            defaults[dest] = action.type(value)
        else:
            defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _load(args) -> tuple[GxEDataset, object]:
    if not args.input:
        raise InputError("--input is required")
    genes, envs = _csv_list(args.genes), _csv_list(args.envs)
    if not genes or not envs:
        raise InputError("--genes and --envs are required")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        data = ingest_csv(args.input, args.outcome, genes, envs, _csv_list(args.covariates))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    env_range = _parse_range(args.env_range)
    if args.pomp:
        lo, hi = env_range if env_range else (None, None)
        E, _ = pomp_rescale(data.environments, lo, hi, names=data.env_names)
        data = GxEDataset(data.outcome, data.genes, E, data.covariates,
                          data.gene_names, data.env_names, data.covariate_names)
        env_range = (0.0, 100.0)
    return data, env_range


def _parse_range(text):
    if not text:
        return None
    parts = _csv_list(text)
    if len(parts) != 2:
        raise InputError(f"expected LO,HI, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not hi > lo:
        raise InputError(f"empty range {text!r}")
    return lo, hi


def _write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)


def _full(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def cmd_fit(args, out) -> int:
    data, _ = _load(args)
    cross = args.crossover
    crossover = None if cross == "none" else ("free" if cross == "free" else float(cross))
    m = fit_legit(data, crossover, args.strong, tol=args.tol, max_iter=args.max_iter)
    d = m.diagnostics
    pairs = [("beta0", m.beta0), ("beta_e", m.beta_e), ("beta_g", m.beta_g), ("beta_eg", m.beta_eg)]
    if m.crossover is not None:
        pairs.append(("crossover", m.crossover))
    if m.crossover_se is not None:
        pairs.append(("crossover_se", m.crossover_se))
    pairs += [(f"p[{nm}]", w) for nm, w in zip(data.gene_names, m.gene_weights)]
    pairs += [(f"q[{nm}]", w) for nm, w in zip(data.env_names, m.env_weights)]
    pairs += [(f"gamma[{nm}]", w) for nm, w in zip(data.covariate_names, m.covariate_coefs)]
    pairs += [("r_squared", d.r_squared), ("log_likelihood", d.log_likelihood), ("aic", m.aic),
              ("bic", m.bic), ("n_free_params", m.n_free_params), ("n_obs", d.n_obs),
              ("iterations", m.iterations_used), ("converged", m.converged)]
    for k, v in pairs:
        print(f"{k}\t{_fmt(v)}", file=out)
    if args.output:
        _write_rows(args.output, [("parameter", "value")] + [(k, _full(v)) for k, v in pairs])
    return EXIT_OK


def cmd_classify(args, out) -> int:
    data, env_range = _load(args)
    lo, hi = env_range if env_range else (None, None)
    ms = fit_competitive_set(data, not args.no_null_models, args.bounds, lo, hi,
                             tol=args.tol, max_iter=args.max_iter)
    res = classify(ms, data)
    print(res.format_table(), file=out)
    print("", file=out)
    print(f"label\t{res.label}", file=out)
    print(f"strength\t{res.strength or ''}", file=out)
    print(f"best model\t{res.best_model}", file=out)
    print(f"proportion affected\t{_fmt(res.proportion_affected)}", file=out)
    for key, msg in ms.errors.items():
        print(f"warning: {key} failed: {msg}", file=sys.stderr)
    if args.output:
        rows = [("", *TABLE_COLUMNS)]
        for r in res.table:
            rows.append((r.name, *table_cells(r, digits=17)))
        _write_rows(args.output, rows)
    return EXIT_OK


def cmd_ros(args, out) -> int:
    data, _ = _load(args)
    m = fit_legit(data, tol=args.tol, max_iter=args.max_iter)
    r = regions_of_significance(m, data.environments, args.alpha, args.df_convention)
    pairs = [("L", r.lower), ("U", r.upper), ("alpha", r.alpha), ("df", r.df),
             ("region", r.region), ("range_min", r.observable_range[0]),
             ("range_max", r.observable_range[1]), ("label", r.label)]
    for k, v in pairs:
        print(f"{k}\t{_fmt(v)}", file=out)
    if args.output:
        _write_rows(args.output, [("field", "value")] + [(k, _full(v)) for k, v in pairs])
    return EXIT_OK


def _families(text):
    fams = []
    for item in _csv_list(text):
        try:
            b, c = item.split(":")
            fams.append((float(b), float(c)))
        except ValueError:
            raise InputError(f"bad family {item!r}; expected envBeta:crossover") from None
    return tuple(fams)


def cmd_simulate(args, out) -> int:
    scenarios = study_grid(
        args.setting,
        sample_sizes=tuple(int(x) for x in _csv_list(args.sample_sizes)),
        effect_sizes=tuple(_csv_list(args.effect_sizes)),
        families=_families(args.families),
    )
    methods = _csv_list(args.methods)
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise InputError(f"unknown method(s) {', '.join(bad)}")
    tables = run_study(scenarios, methods, args.replicates, args.jobs, args.seed, args.alpha,
                       not args.no_null_models, args.bounds)
    export_results(tables, args.output)
    long_path = args.long_output or str(Path(args.output).with_name(Path(args.output).stem + "_long.csv"))
    export_long(tables, long_path)
    print(f"wrote {len(tables)} rows to {args.output} and {long_path}", file=out)
    return EXIT_OK


def cmd_pomp(args, out) -> int:
    if not args.input or not args.output:
        raise InputError("--input and --output are required")
    header, rows, delim = read_table(args.input)
    cols = _csv_list(args.columns)
    if not cols:
        raise InputError("--columns is required")
    missing = [c for c in cols if c not in header]
    if missing:
        raise InputError(f"missing column(s) {', '.join(missing)}")
    idx = [header.index(c) for c in cols]
    try:
        X = np.array([[float(row[i]) for i in idx] for row in rows if any(cell.strip() for cell in row)])
    except (ValueError, IndexError) as exc:
        raise InputError(f"non-numeric or missing value in a rescaled column: {exc}") from None
    rng = _parse_range(args.env_range)
    lo, hi = rng if rng else (None, None)
    scaled, scaling = pomp_rescale(X, lo, hi, names=cols)
    body = [row for row in rows if any(cell.strip() for cell in row)]
    for r, row in enumerate(body):
        for j, i in enumerate(idx):
            row[i] = repr(float(scaled[r, j]))
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delim)
        w.writerow(header)
        w.writerows(body)
    for c, a, b in zip(cols, scaling.lower, scaling.upper):
        print(f"{c}\tmin={_fmt(a)}\tmax={_fmt(b)}", file=out)
    return EXIT_OK


HANDLERS = {"fit": cmd_fit, "classify": cmd_classify, "ros": cmd_ros,
            "simulate": cmd_simulate, "pomp": cmd_pomp}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return HANDLERS[args.command](args, out)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0) and EXIT_INPUT
    except (InputError, DimensionError) as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RankDeficientError, CrossoverDivergedError, FloatingPointError) as exc:
        print(f"error[fit]: {exc}", file=sys.stderr)
        return EXIT_FIT
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
