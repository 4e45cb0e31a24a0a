"""Command-line front end.

Exit codes: 0 on success, 1 when a check fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import boundary, buildings, covers, experiments
from .errors import CatboundError
from .spaces import SpaceSpec, build_space, parse_end

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PARAM_KEYS = ("epsilon", "delta", "A")


class UsageError(Exception):
    """Bad invocation or configuration; mapped to exit code 2."""


# ---------------------------------------------------------------------------
# configuration handling
# ---------------------------------------------------------------------------


def _read_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{what} file {path} must hold a JSON object")
    version = doc.get("schema_version", 1)
    if version != experiments.SCHEMA_VERSION:
        raise UsageError(f"schema violation in {path}: unsupported schema_version {version!r}")
    return doc


def _parse_override(text: str) -> tuple[str, Any]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise UsageError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _overrides(args) -> dict[str, Any]:
    return dict(_parse_override(t) for t in args.set or [])


def _run_config(args) -> dict[str, Any]:
    """Merged run configuration: config file, then ``--space``, then ``--set``.

    The document holds an optional ``space`` (a space document), optional
    ``params`` and free-form options.
    """
    doc = dict(_read_json(args.config, "config")) if args.config else {}
    doc.pop("schema_version", None)
    if args.space:
        doc["space"] = _read_json(args.space, "space")
    params = dict(doc.pop("params", {}) or {})
    for key, value in _overrides(args).items():
        if key in PARAM_KEYS:
            params[key] = value
        else:
            doc[key] = value
    doc["params"] = params
    return doc


def _space(conf: dict):
    if "space" not in conf:
        raise UsageError("no space given; use --space FILE or a config with a 'space' entry")
    try:
        return build_space(SpaceSpec.from_json(conf["space"]))
    except CatboundError as exc:
        raise UsageError(f"schema violation in space document: {exc}") from None


def _params(space, conf: dict) -> boundary.MetricParams:
    p = conf["params"]
    delta = p.get("delta", space.delta or 0.0)
    try:
        return boundary.MetricParams(float(p.get("epsilon", 0.5)), float(delta), float(p.get("A", 1.0)))
    except (CatboundError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid metric parameters: {exc}") from None


def _net(space, conf: dict, default):
    resolution = conf.get("net", default)
    if isinstance(resolution, list):
        resolution = tuple(resolution)
    return space.boundary_net(resolution)


DEFAULT_NET = {"tree": 4, "line": None, "plane": 360, "hyperbolic_plane": 64, "product": (2, 2, 6)}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_text(doc: dict) -> str:
    doc = {"schema_version": experiments.SCHEMA_VERSION, **doc}
    return json.dumps(experiments._jsonable(doc), sort_keys=True, indent=2) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_space_info(args) -> int:
    conf = _run_config(args)
    space = _space(conf)
    doc = {
        "space": space.spec.to_json(),
        "kind": space.kind,
        "delta": space.delta,
        "horizon": float(space.horizon),
        "net_size": len(_net(space, conf, DEFAULT_NET[space.kind])),
    }
    if args.format == "csv":
        _emit(args, _csv_text(["kind", "delta", "horizon", "net_size"],
                              [[doc["kind"], doc["delta"], doc["horizon"], doc["net_size"]]]))
    else:
        _emit(args, _json_text(doc))
    return EXIT_OK


def cmd_metric(args) -> int:
    conf = _run_config(args)
    space = _space(conf)
    params = _params(space, conf)
    if not args.pair:
        raise UsageError("metric needs --pair a,b")
    sep = "," if "," in args.pair else None
    parts = args.pair.split(sep) if sep else args.pair.split()
    if len(parts) != 2:
        raise UsageError("--pair takes exactly two boundary points separated by a comma")
    xi, eta = (parse_end(space, p) for p in parts)
    if args.kind == "moran":
        value = boundary.moran_metric(space, params, xi, eta)
    else:
        net = list(_net(space, conf, DEFAULT_NET[space.kind]))
        for z in (xi, eta):
            if z not in net:
                net.append(z)
        value = boundary.visual_metric(space, params, net, xi, eta)
    if args.format == "json":
        _emit(args, _json_text({"kind": args.kind, "pair": parts, "value": value,
                                "params": params.to_json()}))
    elif args.format == "csv":
        _emit(args, _csv_text(["kind", "a", "b", "value"], [[args.kind, parts[0], parts[1], value]]))
    else:
        _emit(args, f"{value:.12g}\n")
    return EXIT_OK


def cmd_cover(args) -> int:
    conf = _run_config(args)
    space = _space(conf)
    params = _params(space, conf)
    net = _net(space, conf, DEFAULT_NET[space.kind])
    L = float(conf.get("L", 0.5))
    colors = int(conf.get("colors", 2))
    dist = covers.distance_matrix(space, args.kind, params, net)
    cover = covers.greedy_colored_cover(space, args.kind, params, net, L, colors, dist=dist)
    stats = covers.cover_stats(space, cover, dist, scale=L)
    if args.format == "csv":
        rows = [[i, e.color, len(e.members)] for i, e in enumerate(cover.elements)]
        _emit(args, _csv_text(["element", "color", "size"], rows))
    else:
        _emit(args, _json_text({"cover": cover.to_json(), "stats": stats.to_json()}))
    return EXIT_OK


def cmd_pullback(args) -> int:
    conf = _run_config(args)
    space = _space(conf)
    try:
        b = buildings.build_building(space)
    except CatboundError as exc:
        raise UsageError(str(exc)) from None
    A = float(conf["params"].get("A", 1.0))
    c = float(conf.get("c", 2.0))
    Ls = conf.get("L", [1.0])
    Ls = [float(x) for x in (Ls if isinstance(Ls, list) else [Ls])]
    net = _net(space, conf, DEFAULT_NET[space.kind])
    moran_space = space
    if b.rank == 2:
        depth = experiments.PRODUCT_RAY_DEPTH
        deep = [SpaceSpec.from_json({**f.to_json(), "truncation_depth": max(depth, f.truncation_depth)})
                for f in space.spec.factors]
        moran_space = build_space(SpaceSpec("product", factors=tuple(deep)))
    reports = experiments.pullback_campaign(b, net, Ls, c, A, int(conf.get("colors", 2)),
                                            moran_space=moran_space)
    passed = all(r.passed for r in reports)
    if args.format == "csv":
        rows = [[r.L, r.families_out, r.sphere_separation, r.inner_diameter, r.moran_separation,
                 r.moran_bound, r.passed] for r in reports]
        _emit(args, _csv_text(["L", "families", "sphere_separation", "inner_diameter",
                               "moran_separation", "moran_bound", "passed"], rows))
    else:
        _emit(args, _json_text({"passed": passed, "reports": [r.to_json() for r in reports]}))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_verify(args) -> int:
    doc = _read_json(args.config, "config") if args.config else {}
    doc = {**doc, **_overrides(args)}
    try:
        cfg = experiments.ExperimentConfig.from_json(doc)
    except (CatboundError, TypeError) as exc:
        raise UsageError(f"schema violation in verification config: {exc}") from None
    report = experiments.run_verification_suite(cfg)
    if args.format == "csv":
        rows = [[c.name, c.anchor, c.status] for c in report.checks]
        _emit(args, _csv_text(["name", "anchor", "status"], rows))
    else:
        _emit(args, report.dumps() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def cmd_experiment(args) -> int:
    conf = _run_config(args)
    space = _space(conf)
    A = float(conf["params"].get("A", 1.0))
    if args.name == "annulus":
        if not args.D:
            raise UsageError("the annulus experiment needs --D d1,d2,...")
        rows = experiments.annulus_cover_experiment(space, A, float(conf.get("width", 10.0)),
                                                    _float_list(args.D), float(conf.get("c", 0.5)))
        if args.format == "json":
            _emit(args, _json_text({"rows": [r.to_json() for r in rows],
                                    "summary": experiments.annulus_summary(rows)}))
        else:
            _emit(args, _csv_text(["D", "mesh", "lebesgue", "M"],
                                  [[r.D, r.mesh, r.lebesgue, r.M] for r in rows]))
        return EXIT_OK
    rows = experiments.quasisymmetry_distortion(space, A, float(conf.get("A_prime", 2.0 * A)),
                                                int(conf.get("n", 500)), int(conf.get("seed", 0)))
    if args.format == "json":
        _emit(args, _json_text({"rows": [list(r) for r in rows]}))
    else:
        _emit(args, _csv_text(["ratio_A", "ratio_A_prime"], rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration document")
    common.add_argument("--out", help="write output to this file instead of standard output")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a configuration value (repeatable)")

    spaced = argparse.ArgumentParser(add_help=False)
    spaced.add_argument("--space", help="JSON space document")

    parser = _Parser(prog="catbound", description="Boundary metrics and covers of CAT(0) model spaces.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    sub.add_parser("space-info", parents=[common, spaced], help="describe a space")
    p = sub.add_parser("metric", parents=[common, spaced], help="distance between two boundary points")
    p.add_argument("--kind", choices=covers.METRIC_KINDS, default="moran")
    p.add_argument("--pair", help="two boundary points, comma separated")
    p = sub.add_parser("cover", parents=[common, spaced], help="greedy colored cover of a boundary net")
    p.add_argument("--kind", choices=covers.METRIC_KINDS, default="moran")
    sub.add_parser("pullback", parents=[common, spaced], help="pull an apartment cover back to a building")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    p = sub.add_parser("experiment", parents=[common, spaced], help="run an experiment")
    p.add_argument("name", choices=("annulus", "quasisymmetry"))
    p.add_argument("--D", help="comma-separated radii for the annulus experiment")
    return parser


HANDLERS = {
    "space-info": cmd_space_info,
    "metric": cmd_metric,
    "cover": cmd_cover,
    "pullback": cmd_pullback,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
}


def parse_and_dispatch(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return HANDLERS[args.verb](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CatboundError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
