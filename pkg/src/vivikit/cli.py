"""Command-line interface: fit, vivi, plot and simulate.

Exit codes are 0 on success, 2 on usage errors and 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .arrange import seriate
from .models import (CLASSIFICATION, REGRESSION, ExternalModelError, KNearestNeighbors,
                     RandomForest, dump_model, external_predictor, load_model)
from .netgraph import build_graph, cluster_nodes, eulerian
from .plotspec import (PlotSpec, gpdp_spec, heatmap_spec, network_spec, render_json,
                       render_svg, zpdp_spec, zpdp_surfaces)
from .simbench import SimConfig, friedman
from .tabular import DataError, log_transform, read_csv, split, write_csv
from .vivi import FlatSurfaceWarning, ViviMatrix, vivi_matrix


class UsageError(Exception):
    """Bad combination of arguments detected after parsing."""


def _add_data_args(p: argparse.ArgumentParser, required=True):
    p.add_argument("--data", required=required, help="CSV file with a header row")
    p.add_argument("--response", help="response column")
    p.add_argument("--log", action="append", default=[], metavar="COL[:OFFSET]",
                   help="log-transform a column (offset 0 or 1); repeatable or comma-separated")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; explicit flags take precedence")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vivikit",
                                     description="Variable importance and interaction displays.")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model and save it")
    _add_common(fit)
    _add_data_args(fit)
    fit.add_argument("--model", choices=("knn", "forest", "external"), default="forest")
    fit.add_argument("--k", type=int, default=7, help="neighbours for knn")
    fit.add_argument("--n-trees", type=int, default=100)
    fit.add_argument("--min-node", type=int, default=5)
    fit.add_argument("--mtry", type=int)
    fit.add_argument("--external-command", help="command line of an external model")
    fit.add_argument("--task", choices=(REGRESSION, CLASSIFICATION))
    fit.add_argument("--split", type=float, help="train fraction; test metrics are printed")
    fit.add_argument("--out", required=True, help="model file to write")

    vv = sub.add_parser("vivi", help="compute a VIVI matrix")
    _add_common(vv)
    _add_data_args(vv)
    vv.add_argument("--model", dest="model_file", help="saved model file")
    vv.add_argument("--external-command", help="command line of an external model")
    vv.add_argument("--task", choices=(REGRESSION, CLASSIFICATION), default=REGRESSION)
    vv.add_argument("--importance", choices=("embedded", "permutation", "file"),
                    default="permutation")
    vv.add_argument("--importance-file", help="one value per line, in feature order")
    vv.add_argument("--interaction", choices=("h", "h2"), default="h")
    vv.add_argument("--sample", type=int, default=50)
    vv.add_argument("--n-perm", type=int, default=4)
    vv.add_argument("--class-index", type=int)
    vv.add_argument("--threads", type=int)
    vv.add_argument("--out", required=True, help="output prefix for .json and .csv")

    pl = sub.add_parser("plot", help="render a display")
    _add_common(pl)
    _add_data_args(pl, required=False)
    pl.add_argument("--kind", choices=("heatmap", "network", "gpdp", "zpdp"), required=True)
    pl.add_argument("--matrix", help="VIVI matrix JSON")
    pl.add_argument("--model", dest="model_file", help="saved model file")
    pl.add_argument("--threshold", type=float, default=0.0)
    pl.add_argument("--top", type=int)
    pl.add_argument("--lambda1", type=float, default=1.0)
    pl.add_argument("--lambda2", type=float, default=1.0)
    pl.add_argument("--linkage", choices=("average", "complete", "single"), default="average")
    pl.add_argument("--layout", choices=("radial", "force"), default="radial")
    pl.add_argument("--clusters", action="store_true", help="outline node clusters")
    pl.add_argument("--vars", help="comma-separated variables for gpdp")
    pl.add_argument("--grid", type=int, default=10)
    pl.add_argument("--max-rows", type=int, default=300)
    pl.add_argument("--class-index", type=int)
    pl.add_argument("--join-components", action=argparse.BooleanOptionalAction, default=True)
    pl.add_argument("--threads", type=int)
    pl.add_argument("--out", required=True, help="output prefix for .svg and .json")

    sim = sub.add_parser("simulate", help="write a Friedman benchmark dataset")
    _add_common(sim)
    sim.add_argument("--n", type=int, default=1000)
    sim.add_argument("--p", type=int, default=10)
    sim.add_argument("--sd", type=float, default=1.0)
    sim.add_argument("--correlated", action="store_true")
    sim.add_argument("--out", help="CSV path (default: standard output)")
    return parser


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("_", "-")] = value
    return out


def _config_tokens(subparser: argparse.ArgumentParser, config: dict[str, str]) -> list[str]:
    actions = {opt: a for a in subparser._actions for opt in a.option_strings}
    tokens = []
    for key, value in config.items():
        flag = "--" + key
        action = actions.get(flag)
        if action is None or key == "config":
            raise UsageError(f"unknown config key {key!r}")
        truthy = value.lower() in ("1", "true", "yes", "on")
        if isinstance(action, argparse._StoreTrueAction):
            if truthy:
                tokens.append(flag)
        elif isinstance(action, argparse.BooleanOptionalAction):
            tokens.append(flag if truthy else "--no-" + key)
        else:
            tokens += [flag, value]
    return tokens


def parse_args(argv):
    """Parse ``argv``, placing config-file values before the explicit flags."""
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config and command is not None:
        subparser = parser._subparsers._group_actions[0].choices[command]
        pos = argv.index(command) + 1
        argv = argv[:pos] + _config_tokens(subparser, read_config(known.config)) + argv[pos:]
    return parser.parse_args(argv)


def resolve_threads(value) -> int:
    if value is None:
        value = os.environ.get("VIVI_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"thread count must be an integer, got {value!r}") from None
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


def _log_specs(items) -> list[tuple[str, int]]:
    out = []
    for item in items:
        for part in filter(None, (s.strip() for s in item.split(","))):
            name, _, off = part.partition(":")
            try:
                out.append((name, int(off) if off else 0))
            except ValueError:
                raise UsageError(f"bad log offset in {part!r}") from None
    return out


def load_data(args, response=None):
    table = read_csv(args.data, response=response)
    if table.n_dropped:
        print(f"dropped {table.n_dropped} row(s) with missing cells", file=sys.stderr)
    for name, offset in _log_specs(args.log):
        table = log_transform(table, [name], offset)
    return table


def _metrics(model, test) -> list[str]:
    y_col = test[test.response]
    if model.task_ == CLASSIFICATION:
        from sklearn.metrics import roc_auc_score
        probs = model.predict_proba(test)
        truth = np.array([y_col.levels[c] for c in y_col.values])
        acc = float(np.mean(model.predict(test) == truth))
        codes = np.array([list(model.classes_).index(v) for v in truth])
        try:
            if probs.shape[1] == 2:
                auc = roc_auc_score(codes, probs[:, 1])
            else:
                auc = roc_auc_score(codes, probs, multi_class="ovr", labels=list(range(probs.shape[1])))
            auc_text = f"{auc:.6f}"
        except ValueError:
            auc_text = "undefined"
        return [f"test accuracy: {acc:.6f}", f"test AUC: {auc_text}"]
    pred = model.predict(test)
    y = y_col.values
    rmse = float(np.sqrt(np.mean((y - pred) ** 2)))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / float(np.sum((y - y.mean()) ** 2))
    return [f"test RMSE: {rmse:.6f}", f"test R2: {r2:.6f}"]


def cmd_fit(args) -> int:
    if not args.response:
        raise UsageError("fit needs --response")
    table = load_data(args, args.response)
    train, test = (table, None) if args.split is None else split(table, args.split, args.seed)
    if args.model == "knn":
        model = KNearestNeighbors(k=args.k).fit(train)
    elif args.model == "forest":
        model = RandomForest(n_trees=args.n_trees, min_node=args.min_node, mtry=args.mtry,
                             seed=args.seed).fit(train)
    else:
        if not args.external_command:
            raise UsageError("--model external needs --external-command")
        task = args.task or table.task
        model = external_predictor(shlex.split(args.external_command),
                                   table.schema(), task)
        model.response_ = args.response
    print(f"fitted {args.model} on {train.n} rows", file=sys.stderr)
    if test is not None:
        for line in _metrics(model, test):
            print(line)
    dump_model(model, args.out)
    return 0


def _load_predictor(args, table):
    if args.model_file:
        return load_model(args.model_file)
    if args.external_command:
        names = [n for n in table.names if n != table.response]
        return external_predictor(shlex.split(args.external_command), table.schema(names),
                                  args.task)
    raise UsageError("need --model or --external-command")


def cmd_vivi(args) -> int:
    threads = resolve_threads(args.threads)
    table = load_data(args)
    response = args.response
    if response is None and args.model_file:
        response = load_model(args.model_file).response_
    table = table.with_response(response)
    model = _load_predictor(args, table)
    importance = args.importance
    if importance == "file":
        if not args.importance_file:
            raise UsageError("--importance file needs --importance-file")
        importance = np.loadtxt(args.importance_file, dtype=np.float64, ndmin=1)
    elif importance == "permutation" and table.response is None:
        raise UsageError("permutation importance needs --response")
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FlatSurfaceWarning)
        M = vivi_matrix(model, table, importance=importance, interaction=args.interaction,
                        sample_rows=args.sample, n_perm=args.n_perm, seed=args.seed,
                        threads=threads, class_index=args.class_index)
    elapsed = time.perf_counter() - start
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    Path(args.out + ".json").write_text(M.to_json(), encoding="utf-8")
    Path(args.out + ".csv").write_text(M.to_csv(), encoding="utf-8")
    print(f"vivi: {M.p} variables, {M.p * (M.p - 1) // 2} pairs, {elapsed:.3f} s "
          f"on {threads} thread(s)", file=sys.stderr)
    return 0


def _need(args, *names):
    missing = [n for n in names if not getattr(args, n)]
    if missing:
        flags = ", ".join("--" + ("model" if n == "model_file" else n) for n in missing)
        raise UsageError(f"--kind {args.kind} needs {flags}")


def cmd_plot(args) -> int:
    threads = resolve_threads(args.threads)
    if args.top is not None and args.top < 1:
        raise UsageError("--top must be >= 1")
    M = order = None
    if args.matrix:
        M = ViviMatrix.from_json(Path(args.matrix).read_text(encoding="utf-8"))
        order = seriate(M, args.lambda1, args.lambda2, args.linkage)
    if args.kind == "heatmap":
        _need(args, "matrix")
        spec = heatmap_spec(M, order, args.top)
    elif args.kind == "network":
        _need(args, "matrix")
        if args.top is not None:
            keep = set(order.order[: args.top])
            values = M.values.copy()
            for i in range(M.p):
                for j in range(M.p):
                    if i != j and (i not in keep or j not in keep):
                        values[i, j] = 0.0
            M = ViviMatrix(M.names, values, M.importance_raw, M.importance_measure,
                           M.interaction_measure, M.sample_rows, M.seed)
        g = build_graph(M, args.threshold)
        if not g.edges:
            print(f"warning: no interactions above threshold {args.threshold}", file=sys.stderr)
        clusters = cluster_nodes(g) if args.clusters and g.nodes else None
        spec = network_spec(g, args.layout, clusters, order, args.seed)
    else:
        _need(args, "model_file", "data")
        model = load_model(args.model_file)
        table = load_data(args, model.response_)
        if args.kind == "gpdp":
            if args.vars:
                names = [v.strip() for v in args.vars.split(",") if v.strip()]
            elif order is not None:
                names = order.ordered_names[: min(args.top or 8, 8)]
            else:
                raise UsageError("--kind gpdp needs --vars or --matrix")
            spec = gpdp_spec(model, table, names, args.grid, args.max_rows, seed=args.seed,
                             threads=threads, class_index=args.class_index)
        else:
            _need(args, "matrix")
            g = build_graph(M, args.threshold)
            if not g.edges:
                print(f"warning: no interactions above threshold {args.threshold}",
                      file=sys.stderr)
                seq, surfaces = None, []
            else:
                seq = eulerian(g, args.join_components)
                surfaces = zpdp_surfaces(model, table, seq, args.grid, args.max_rows,
                                         args.seed, threads, args.class_index)
            if seq is None:
                spec = PlotSpec("zpdp", 200.0, 100.0, notice="No interactions to display.")
            else:
                spec = zpdp_spec(seq, surfaces, table, seed=args.seed)
    Path(args.out + ".svg").write_text(render_svg(spec), encoding="utf-8")
    Path(args.out + ".json").write_text(render_json(spec), encoding="utf-8")
    print(f"plot: wrote {args.out}.svg with {len(spec.panels)} panel(s)", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    try:
        cfg = SimConfig(n=args.n, p=args.p, sd=args.sd, correlated=args.correlated,
                        seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = friedman(cfg)
    if args.out:
        write_csv(table, args.out)
    else:
        import csv
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(table.names)
        cols = [c.labels() for c in table.columns]
        for i in range(table.n):
            writer.writerow([c[i] for c in cols])
    return 0


COMMANDS = {"fit": cmd_fit, "vivi": cmd_vivi, "plot": cmd_plot, "simulate": cmd_simulate}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except UsageError as exc:
        print(f"vivikit: usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError, ExternalModelError, KeyError) as exc:
        print(f"vivikit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
