"""Command-line pipelines.

Every artifact embeds the configuration that produced it, so any output can
be replayed.  Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric
failure.  Errors are reported on stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .apf import DEFAULT_N_GRID, CurveSample, apf_from_diagram, discretize
from .bootstrap import mean_band, two_sample
from .designs import SPATIAL_MODELS, circles, curves_of, diagram_of, spatial_model
from .envelope import ENVELOPE_N_GRID, combine_envelopes, rank_envelope_test
from .errors import APFError, ParseError, UnknownVertexInEdge
from .fda import classify, functional_boxplot, kmeans_curves
from .persistence import HeightGraph, PersistenceDiagram, ph_sublevel
from .pointprocess import sample_on_circles


# ---------------------------------------------------------------- parsing

def _is_comment(line: str) -> bool:
    s = line.strip()
    return not s or s.startswith("#")


def parse_points(path) -> np.ndarray:
    """Read ``x,y`` rows; a non-numeric first line is taken as a header."""
    pts = []
    first = True
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if _is_comment(line):
                continue
            fields = line.split(",")
            try:
                if len(fields) != 2:
                    raise ValueError
                x, y = float(fields[0]), float(fields[1])
            except ValueError:
                if first:
                    first = False
                    continue
                raise ParseError(lineno, f"expected 'x,y', got {line.strip()!r}") from None
            first = False
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ParseError(lineno, "coordinates must be finite")
            pts.append((x, y))
    return np.array(pts, dtype=float).reshape(-1, 2)


def parse_heightgraph(path) -> HeightGraph:
    """Read ``v id x y z`` and ``e id1 id2`` lines; the height is ``z``."""
    ids, heights, coords, index = [], [], [], {}
    pending = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if _is_comment(line):
                continue
            tok = line.split()
            if tok[0] == "v" and len(tok) == 5:
                try:
                    x, y, z = (float(t) for t in tok[2:])
                except ValueError:
                    raise ParseError(lineno, "vertex coordinates must be numbers") from None
                if not all(math.isfinite(t) for t in (x, y, z)):
                    raise ParseError(lineno, "vertex coordinates must be finite")
                if tok[1] in index:
                    raise ParseError(lineno, f"duplicate vertex id {tok[1]!r}")
                index[tok[1]] = len(ids)
                ids.append(tok[1])
                heights.append(z)
                coords.append((x, y, z))
            elif tok[0] == "e" and len(tok) == 3:
                pending.append((lineno, tok[1], tok[2]))
            else:
                raise ParseError(lineno, f"expected 'v id x y z' or 'e id1 id2', got {line.strip()!r}")
    edges = []
    for lineno, a, b in pending:
        for v in (a, b):
            if v not in index:
                raise UnknownVertexInEdge(lineno, v)
        edges.append((index[a], index[b]))
    return HeightGraph(np.array(heights, dtype=float), np.array(edges, dtype=np.int64).reshape(-1, 2),
                       ids, np.array(coords, dtype=float).reshape(-1, 3))


# ---------------------------------------------------------- serialization

def _num(x: float) -> str:
    return repr(float(x))


def _config_line(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True)


def write_points(path, pts: np.ndarray, config: dict):
    lines = [_config_line(config), "x,y"]
    lines += [f"{_num(x)},{_num(y)}" for x, y in pts]
    Path(path).write_text("\n".join(lines) + "\n")


def diagram_to_json(dgm: PersistenceDiagram, config: dict) -> str:
    doc = {"config": config, "dim": dgm.dim,
           "points": [{"birth": b, "death": d, "mult": c} for b, d, c in dgm.points()]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_diagram(path) -> PersistenceDiagram:
    try:
        doc = json.loads(Path(path).read_text())
        pts = [(p["birth"], p["death"], p["mult"]) for p in doc["points"]]
        return PersistenceDiagram.from_pairs(int(doc["dim"]), pts)
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(0, f"not a diagram file: {exc}") from None


def write_columns(path, grid: np.ndarray, columns: dict[str, np.ndarray], config: dict):
    names = ["m", *columns]
    lines = [_config_line(config), ",".join(names)]
    cols = [grid, *columns.values()]
    for row in zip(*cols):
        lines.append(",".join(_num(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve(path) -> CurveSample:
    """Read a curve CSV written by ``apf`` (columns ``m,value``)."""
    ms, vs = [], []
    header = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if _is_comment(line):
                continue
            if not header:
                if line.strip().replace(" ", "") != "m,value":
                    raise ParseError(lineno, "curve files start with the header 'm,value'")
                header = True
                continue
            try:
                m, v = (float(t) for t in line.split(","))
            except ValueError:
                raise ParseError(lineno, f"expected 'm,value', got {line.strip()!r}") from None
            ms.append(m)
            vs.append(v)
    if len(ms) < 2:
        raise ParseError(0, f"{path}: a curve needs at least two rows")
    return CurveSample((ms[0], ms[-1]), np.array(vs))


def _is_curve_file(path) -> bool:
    with open(path) as fh:
        for line in fh:
            if not _is_comment(line):
                return line.strip().replace(" ", "") == "m,value"
    return False


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_plot(grid: np.ndarray, lines: Sequence[tuple[str, np.ndarray, str]], config: dict,
             title: str = "", band: tuple[np.ndarray, np.ndarray] | None = None,
             width: int = 640, height: int = 400) -> str:
    """Static SVG line plot; ``lines`` holds ``(label, values, colour)``."""
    pad = 40
    ys = [v for _, v, _ in lines] + (list(band) if band else [])
    y_lo = min(float(np.min(v)) for v in ys) if ys else 0.0
    y_hi = max(float(np.max(v)) for v in ys) if ys else 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = float(grid[0]), float(grid[-1])

    def sx(x):
        return pad + (x - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    def path(values):
        return " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(grid, values))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f"<metadata>{_escape(json.dumps(config, sort_keys=True))}</metadata>",
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{pad}" y="20" font-size="14">{_escape(title)}</text>']
    if band is not None:
        lo, hi = band
        poly = path(hi) + " " + " ".join(
            f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(grid[::-1], lo[::-1]))
        out.append(f'<polygon points="{poly}" fill="#cccccc" stroke="none"/>')
    out.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>')
    out.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
    out.append(f'<text x="{pad}" y="{height - 10}" font-size="11">{_num(x_lo)}</text>')
    out.append(f'<text x="{width - pad}" y="{height - 10}" font-size="11" text-anchor="end">{_num(x_hi)}</text>')
    out.append(f'<text x="5" y="{pad}" font-size="11">{y_hi:.4g}</text>')
    out.append(f'<text x="5" y="{height - pad}" font-size="11">{y_lo:.4g}</text>')
    for label, values, colour in lines:
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{path(values)}">'
                   f"<title>{_escape(label)}</title></polyline>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _write_json(path, doc: dict):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------- config

@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    output: str | None = None
    k: list[int] = field(default_factory=lambda: [0])
    window: list[float] | None = None
    grid: int = DEFAULT_N_GRID
    alpha: float = 0.05
    B: int = 1000
    r: int = 2499
    seed: int = 0
    statistic: str = "ks"
    interval: list[float] | None = None
    workers: int = 1
    model: str | None = None
    rho: float = 100.0
    n: int = 100
    circles: str | None = None
    sigma: float = 0.0
    replicates: int = 1
    graph: str | None = None
    allocated_time: float | None = None
    inflation: float = 1.5
    K: int = 2
    groups: list[list[str]] = field(default_factory=list)
    group_b: list[str] = field(default_factory=list)
    max_iter: int = 100

    def to_dict(self) -> dict:
        # Workers do not influence results, so they are left out of artifacts.
        d = asdict(self)
        d.pop("workers")
        d["version"] = __version__
        return d


def _window(cfg: RunConfig, rho: float | None = None) -> tuple[float, float]:
    if cfg.window is not None:
        return float(cfg.window[0]), float(cfg.window[1])
    if rho is not None:
        return 0.0, 2.5 / math.sqrt(rho)
    raise APFError("--window T1:T2 is required for this command")


def _load_curves(paths: Sequence[str], k: int, window, cfg: RunConfig) -> list[CurveSample]:
    def one(p):
        if _is_curve_file(p):
            return read_curve(p)
        return curves_of(parse_points(p), [k], window, cfg.grid)[k]
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as ex:
        return list(ex.map(one, paths))


def _derived_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def _single_k(cfg: RunConfig) -> int:
    if len(cfg.k) != 1:
        raise APFError("this command takes a single --k")
    return cfg.k[0]


# --------------------------------------------------------------- commands

def cmd_simulate(cfg: RunConfig):
    conf = cfg.to_dict()
    if cfg.model == "circles":
        if not cfg.circles:
            raise APFError("--circles 'x,y,r;...' is required for the circles model")
        try:
            shape = circles(*[tuple(float(t) for t in c.split(",")) for c in cfg.circles.split(";")])
        except ValueError:
            raise APFError(f"cannot parse --circles {cfg.circles!r}") from None
        def draw(rng):
            return sample_on_circles(cfg.n, shape, cfg.sigma, rng)
    else:
        draw = spatial_model(cfg.model, cfg.rho)
    seeds = _derived_seeds(cfg.seed, cfg.replicates)
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as ex:
        patterns = list(ex.map(lambda s: draw(np.random.default_rng(s)), seeds))
    out = Path(cfg.output)
    if cfg.replicates == 1:
        write_points(out, patterns[0], conf)
        return
    out.mkdir(parents=True, exist_ok=True)
    for i, pts in enumerate(patterns):
        write_points(out / f"points_{i:04d}.csv", pts, {**conf, "replicate": i})


def cmd_ph(cfg: RunConfig):
    if cfg.graph:
        dgm = ph_sublevel(parse_heightgraph(cfg.graph))
    else:
        if len(cfg.inputs) != 1:
            raise APFError("ph takes one points file or --graph")
        dgm = diagram_of(parse_points(cfg.inputs[0]), _single_k(cfg))
    Path(cfg.output).write_text(diagram_to_json(dgm, cfg.to_dict()))


def cmd_apf(cfg: RunConfig):
    if len(cfg.inputs) != 1:
        raise APFError("apf takes one diagram file")
    dgm = read_diagram(cfg.inputs[0])
    if cfg.window is None:
        top = float(dgm.death.max()) if len(dgm) else 1.0
        window = (0.0, top)
    else:
        window = _window(cfg)
    curve = discretize(apf_from_diagram(dgm, cfg.allocated_time), window, cfg.grid)
    conf = cfg.to_dict()
    conf["window"] = list(window)
    write_columns(cfg.output, curve.grid, {"value": curve.values}, conf)


def cmd_envelope(cfg: RunConfig):
    if len(cfg.inputs) != 1:
        raise APFError("envelope takes one observed points file")
    window = _window(cfg, cfg.rho)
    conf = {**cfg.to_dict(), "window": list(window)}
    observed_pts = parse_points(cfg.inputs[0])
    draw = spatial_model(cfg.model or "csr", cfg.rho)
    seeds = _derived_seeds(cfg.seed, cfg.r)

    def sim(s):
        return curves_of(draw(np.random.default_rng(s)), cfg.k, window, cfg.grid)

    observed = curves_of(observed_pts, cfg.k, window, cfg.grid)
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as ex:
        sims = list(ex.map(sim, seeds))
    lists = [(observed[k], [s[k] for s in sims]) for k in cfg.k]
    if len(lists) == 1:
        res = rank_envelope_test(*lists[0], alpha=cfg.alpha)
        lowers, uppers = (res.lower,), (res.upper,)
    else:
        res = combine_envelopes(lists, alpha=cfg.alpha)
        lowers, uppers = res.lower, res.upper
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    for k, lo, hi in zip(cfg.k, lowers, uppers):
        obs = observed[k]
        write_columns(out / f"band_k{k}.csv", obs.grid,
                      {"lower": lo.values, "upper": hi.values, "observed": obs.values}, conf)
        (out / f"band_k{k}.svg").write_text(svg_plot(
            obs.grid, [("observed", obs.values, _PALETTE[1])], conf,
            title=f"rank envelope, k={k}", band=(lo.values, hi.values)))
    _write_json(out / "decision.json", {
        "config": conf, "l_alpha": res.l_alpha, "statistic": res.statistic,
        "statistic_strict": res.statistic_strict, "observed_rank": int(res.ranks[0]),
        "reject": res.reject, "decision": "reject" if res.reject else "accept",
        "no_valid_l": res.no_valid_l})


def cmd_boxplot(cfg: RunConfig):
    window = _window(cfg)
    k = _single_k(cfg)
    conf = cfg.to_dict()
    curves = _load_curves(cfg.inputs, k, window, cfg)
    res = functional_boxplot(curves, cfg.inflation)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "boxplot.json", {
        "config": conf, "depths": [float(d) for d in res.depths],
        "central_index": res.central_index, "outlier_indices": res.outlier_indices,
        "outlier_files": [cfg.inputs[i] for i in res.outlier_indices]})
    g = curves[0].grid
    write_columns(out / "boxplot.csv", g, {
        "central_lower": res.central_lower.values, "central_upper": res.central_upper.values,
        "fence_lower": res.fence_lower.values, "fence_upper": res.fence_upper.values}, conf)
    lines = [(cfg.inputs[i], curves[i].values, _PALETTE[1]) for i in res.outlier_indices]
    lines.append(("deepest", curves[res.central_index].values, "black"))
    lines.append(("fence_lower", res.fence_lower.values, _PALETTE[0]))
    lines.append(("fence_upper", res.fence_upper.values, _PALETTE[0]))
    (out / "boxplot.svg").write_text(svg_plot(
        g, lines, conf, title="functional boxplot",
        band=(res.central_lower.values, res.central_upper.values)))


def cmd_ci_mean(cfg: RunConfig):
    window = _window(cfg)
    conf = cfg.to_dict()
    curves = _load_curves(cfg.inputs, _single_k(cfg), window, cfg)
    res = mean_band(curves, cfg.alpha, cfg.B, cfg.seed)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "band.json", {"config": conf, "q_hat": res.q_hat,
                                    "half_width": res.half_width})
    g = res.mean.grid
    write_columns(out / "band.csv", g, {"mean": res.mean.values, "lower": res.lower.values,
                                         "upper": res.upper.values}, conf)
    (out / "band.svg").write_text(svg_plot(
        g, [("mean", res.mean.values, "black")], conf, title="mean confidence band",
        band=(res.lower.values, res.upper.values)))


def cmd_two_sample(cfg: RunConfig):
    window = _window(cfg)
    k = _single_k(cfg)
    conf = cfg.to_dict()
    a = _load_curves(cfg.inputs, k, window, cfg)
    b = _load_curves(cfg.group_b, k, window, cfg)
    res = two_sample(a, b, cfg.statistic, cfg.alpha, cfg.B, cfg.seed, cfg.interval)
    _write_json(cfg.output, {"config": conf, "statistic": res.statistic, "q_hat": res.q_hat,
                             "p_hat": res.p_hat, "reject": res.reject,
                             "decision": "reject" if res.reject else "accept"})


def cmd_cluster(cfg: RunConfig):
    window = _window(cfg)
    conf = cfg.to_dict()
    curves = _load_curves(cfg.inputs, _single_k(cfg), window, cfg)
    labels = kmeans_curves(curves, cfg.K, cfg.seed, cfg.max_iter)
    _write_json(cfg.output, {"config": conf, "labels": [int(x) for x in labels],
                             "files": list(cfg.inputs)})


def cmd_classify(cfg: RunConfig):
    window = _window(cfg)
    k = _single_k(cfg)
    conf = cfg.to_dict()
    if not cfg.groups:
        raise APFError("classify needs at least one --group")
    groups = [_load_curves(g, k, window, cfg) for g in cfg.groups]
    queries = _load_curves(cfg.inputs, k, window, cfg)
    labels = [classify(q, groups, cfg.alpha) for q in queries]
    _write_json(cfg.output, {"config": conf, "labels": labels, "files": list(cfg.inputs)})


COMMANDS = {
    "simulate": cmd_simulate, "ph": cmd_ph, "apf": cmd_apf, "envelope": cmd_envelope,
    "boxplot": cmd_boxplot, "ci-mean": cmd_ci_mean, "two-sample": cmd_two_sample,
    "cluster": cmd_cluster, "classify": cmd_classify,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        COMMANDS[config.command](config)
    except APFError as exc:
        _report(exc, exc.exit_code)
        return exc.exit_code
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        _report(exc, 3)
        return 3
    except OSError as exc:
        _report(exc, 2)
        return 2
    return 0


def _report(exc: Exception, code: int):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if hasattr(exc, "line"):
        doc["line"] = exc.line
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


# ----------------------------------------------------------------- argv

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _pair(text: str) -> list[float]:
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected T1:T2, got {text!r}") from None
    if not a < b:
        raise argparse.ArgumentTypeError(f"expected T1 < T2, got {text!r}")
    return [a, b]


def _ks(text: str) -> list[int]:
    try:
        ks = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k or k,k, got {text!r}") from None
    if not ks or any(k not in (0, 1) for k in ks):
        raise argparse.ArgumentTypeError("k must be 0 or 1")
    return ks


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="apfkit", description="Accumulated persistence functions for point patterns.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, inputs="*"):
        if inputs:
            sp.add_argument("inputs", nargs=inputs)
        sp.add_argument("-o", "--output", required=True)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)

    def curves(sp, default_k="0", grid=DEFAULT_N_GRID):
        sp.add_argument("--k", type=_ks, default=_ks(default_k))
        sp.add_argument("--window", type=_pair)
        sp.add_argument("--grid", type=int, default=grid)

    sp = sub.add_parser("simulate", help="simulate point patterns")
    common(sp, inputs=None)
    sp.add_argument("--model", required=True, choices=[*SPATIAL_MODELS, "circles"])
    sp.add_argument("--rho", type=float, default=100.0)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--circles")
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.add_argument("--replicates", type=int, default=1)

    sp = sub.add_parser("ph", help="persistence diagram of points or a height graph")
    common(sp)
    sp.add_argument("--k", type=_ks, default=[0])
    sp.add_argument("--graph")

    sp = sub.add_parser("apf", help="discretized APF of a diagram")
    common(sp)
    sp.add_argument("--window", type=_pair)
    sp.add_argument("--grid", type=int, default=DEFAULT_N_GRID)
    sp.add_argument("--allocated-time", type=float)

    sp = sub.add_parser("envelope", help="global rank envelope test against a null model")
    common(sp)
    # A fine grid piles the extreme ranks up at 1 and leaves no valid l_alpha.
    curves(sp, grid=ENVELOPE_N_GRID)
    sp.add_argument("--model", default="csr", choices=list(SPATIAL_MODELS))
    sp.add_argument("--rho", type=float, default=100.0)
    sp.add_argument("--r", type=int, default=2499)
    sp.add_argument("--alpha", type=float, default=0.05)

    sp = sub.add_parser("boxplot", help="functional boxplot and outliers")
    common(sp)
    curves(sp)
    sp.add_argument("--inflation", type=float, default=1.5)

    sp = sub.add_parser("ci-mean", help="bootstrap confidence band for the mean APF")
    common(sp)
    curves(sp)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--B", type=int, default=1000)

    sp = sub.add_parser("two-sample", help="bootstrap two-sample test")
    common(sp)
    curves(sp)
    sp.add_argument("--group-b", nargs="+", required=True)
    sp.add_argument("--statistic", choices=["ks", "l1"], default="ks")
    sp.add_argument("--interval", type=_pair)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--B", type=int, default=1000)

    sp = sub.add_parser("cluster", help="K-means clustering of APFs")
    common(sp)
    curves(sp)
    sp.add_argument("--K", type=int, default=2)
    sp.add_argument("--max-iter", type=int, default=100)

    sp = sub.add_parser("classify", help="assign APFs to the nearest trimmed-mean group")
    common(sp)
    curves(sp)
    sp.add_argument("--group", dest="groups", nargs="+", action="append", default=[])
    sp.add_argument("--alpha", type=float, default=0.2)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known = RunConfig.__dataclass_fields__
    kwargs = {k: v for k, v in vars(ns).items() if k in known and v is not None}
    return RunConfig(**kwargs)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(json.dumps({"error": "UsageError", "message": str(exc), "exit_code": 1}),
              file=sys.stderr)
        return 1
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
