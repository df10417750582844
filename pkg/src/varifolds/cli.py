"""Command-line front end: generators, discretization, face sums, energy
curves, tangent fields, regularity reports, and multi-scale sweeps.

Every command reads/writes the text formats described by ``--schema``,
writes outputs atomically, and is deterministic: identical configuration
and seed produce byte-identical files (per kernel backend).  Exit codes:
0 success, 2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import _backend, formats
from .atomic import (AtomicVarifold, Box, sample_circle, sample_graph, sample_line,
                     sample_square_cloud)
from .energy import EnergyParams, energy_alpha, integrated_energy
from .errors import NumericError, ValidationError
from .firstvar import first_variation
from .gridding import discretize, grid_covering, atomize
from .grassmann import Plane, plane_from_basis
from .regularity import ahlfors_constants, hypothesis_report
from .tangent import estimate_tangent, grid_search_oracle, tangent_field

PROG = "varifolds"

SCHEMA = """\
File formats
------------
atomic varifold (one atom per line, floats at full round-trip precision):
    varifold-atoms v1 n=<n> d=<d> count=<N>
    x_1 ... x_n | b_11 ... b_1n ; ... ; b_d1 ... b_dn | m
discrete varifold (sparse cells of a uniform cartesian grid):
    varifold-grid v1 n=<n> d=<d> h=<h> origin=<o_1,...,o_n> counts=<c_1,...,c_n>
    i_1 ... i_n | b_11 ... b_1n ; ... ; b_d1 ... b_dn | m

CSV outputs (comma separated, '\\n' line endings, no locale formatting)
----------------------------------------------------------------------
firstvar   : kind,axis,cell,neighbor,density,area,contribution
             one row per face; final row kind=total with the grand totals
             (cell/neighbor are ';'-joined integer multi-indices)
energy     : alpha,value            one row per requested alpha
tangent    : x_1..x_n,b_11..b_dn,energy,spectral_gap,degenerate,error
             (+oracle_energy,oracle_gap with --oracle)
regularity : delta,alpha,beta_cut,c1,c2,integrated_energy   one row per scale
sweep      : delta,alpha,firstvar_total,h_times_total,integrated_energy,c1,c2

Environment
-----------
VARIFOLDS_BACKEND = auto|numba|numpy   kernel backend (default auto)
VARIFOLDS_THREADS = <int>              default worker count (--threads overrides)
"""

_GRAPH_FUNCTIONS = {
    "flat": (lambda *u: np.zeros_like(u[0]), "f = 0"),
    "linear": (lambda *u: u[0], "f = u1"),
    "parabola": (lambda *u: sum(c**2 for c in u), "f = sum u_i^2"),
    "sine": (lambda *u: np.prod([np.sin(2 * np.pi * c) for c in u], axis=0) / 4.0,
             "f = prod sin(2 pi u_i) / 4"),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated per-command configuration (paths, scales, sampling)."""

    command: str
    input_path: str | None = None
    output_path: str | None = None
    h_list: tuple[float, ...] = ()
    alphas: tuple[float, ...] = ()
    alpha_exp: float | None = None
    beta_cut: float | None = None
    beta_cut_factor: float = 2.0
    q: int = 3
    sample: int | None = None
    centers: int = 64
    seed: int = 0
    threads: int | None = None

    def validate(self) -> "RunConfig":
        if self.h_list and any(h <= 0 for h in self.h_list):
            raise ValidationError("h-list: entries must be > 0")
        if len(self.h_list) > 1 and any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ValidationError("h-list: entries must be strictly decreasing")
        if self.alphas and any(not 0 < a <= 1 for a in self.alphas):
            raise ValidationError("alpha: entries must lie in (0, 1]")
        if self.alpha_exp is not None and self.alpha_exp <= 0:
            raise ValidationError("alpha-exp: exponent must be > 0")
        if self.beta_cut is not None and self.beta_cut <= 0:
            raise ValidationError("beta-cut: must be > 0")
        if self.beta_cut_factor <= 0:
            raise ValidationError("beta-cut-factor: must be > 0")
        if self.q < 1:
            raise ValidationError("q: must be >= 1")
        if self.sample is not None and self.sample < 1:
            raise ValidationError("sample: must be >= 1")
        if self.centers < 1:
            raise ValidationError("centers: must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise ValidationError("threads: must be >= 1")
        return self


def _parse_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise ValidationError(f"{flag}: expected comma-separated floats, got {text!r}") from exc
    if not values:
        raise ValidationError(f"{flag}: empty list")
    return values


def _parse_point(text: str, flag: str) -> np.ndarray:
    return np.array(_parse_floats(text, flag))


def _parse_box(text: str, flag: str) -> Box:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValidationError(f"{flag}: expected 'lo1,lo2,...:hi1,hi2,...', got {text!r}")
    lo = _parse_floats(parts[0], flag)
    hi = _parse_floats(parts[1], flag)
    try:
        return Box(lo, hi)
    except ValidationError as exc:
        raise ValidationError(f"{flag}: {exc}") from exc


def _parse_plane(text: str, flag: str) -> Plane:
    rows = [_parse_floats(chunk, flag) for chunk in text.split(";")]
    try:
        return plane_from_basis(np.array(rows))
    except (ValidationError, NumericError) as exc:
        raise ValidationError(f"{flag}: {exc}") from exc


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return formats.format_float(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    formats.write_text_atomic(path, "\n".join(lines) + "\n")


def _read_atoms(path: str) -> AtomicVarifold:
    if formats.sniff(path) != "atoms":
        raise ValidationError(f"{path}: expected an atomic varifold file")
    return formats.read_atoms(path)


def _apply_threads(threads: int | None) -> None:
    if threads is None:
        threads = _backend.default_thread_count()
    if threads is not None:
        _backend.set_thread_count(threads)


def _alpha_for(config: RunConfig, index: int, h: float) -> float:
    if config.alphas:
        return config.alphas[index]
    assert config.alpha_exp is not None
    return min(1.0, h**config.alpha_exp)


def _beta_cut_for(config: RunConfig, h: float) -> float:
    if config.beta_cut is not None:
        return config.beta_cut
    return config.beta_cut_factor * h


# ----------------------------------------------------------------- commands


def _cmd_generate(args) -> int:
    count = args.count
    if args.shape == "line":
        v = sample_line(_parse_point(args.a, "--a"), _parse_point(args.b, "--b"), count)
    elif args.shape == "circle":
        v = sample_circle(_parse_point(args.center, "--center"), args.radius, count)
    elif args.shape == "graph":
        fn, _ = _GRAPH_FUNCTIONS[args.graph_fn]
        v = sample_graph(fn, args.grid, d=args.graph_d)
    elif args.shape == "square-cloud":
        v = sample_square_cloud(count, seed=args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown shape {args.shape!r}")
    formats.write_atoms(args.out, v)
    print(f"wrote {args.out}: {v!r}, total mass {formats.format_float(v.total_mass)}")
    return 0


def _cmd_discretize(args) -> int:
    config = RunConfig(command="discretize", input_path=args.input, output_path=args.out,
                       h_list=(args.h,), threads=args.threads).validate()
    _apply_threads(config.threads)
    v = _read_atoms(args.input)
    box = _parse_box(args.domain, "--domain") if args.domain else v.domain
    dv = discretize(v, grid_covering(box, args.h))
    formats.write_grid(args.out, dv)
    print(f"wrote {args.out}: {dv!r}, total mass {formats.format_float(dv.total_mass)}")
    return 0


def _cmd_firstvar(args) -> int:
    config = RunConfig(command="firstvar", input_path=args.input, output_path=args.out,
                       h_list=(args.h,) if args.h else (), threads=args.threads).validate()
    _apply_threads(config.threads)
    kind = formats.sniff(args.input)
    if kind == "grid":
        dv = formats.read_grid(args.input)
    else:
        if args.h is None:
            raise ValidationError("--h is required when the input is an atomic varifold file")
        v = _read_atoms(args.input)
        box = _parse_box(args.domain, "--domain") if args.domain else v.domain
        dv = discretize(v, grid_covering(box, args.h))
    report = first_variation(dv)
    rows: list[list] = []
    for term in report.terms:
        rows.append([
            term.kind,
            term.axis,
            ";".join(str(i) for i in term.cell),
            ";".join(str(i) for i in term.neighbor) if term.neighbor is not None else "",
            term.density,
            term.area,
            term.contribution,
        ])
    rows.append(["total", "", "", "", "", "", report.total])
    _write_csv(args.out, ["kind", "axis", "cell", "neighbor", "density", "area", "contribution"],
               rows)
    print(f"wrote {args.out}: |dV|(hull) = {formats.format_float(report.total)} "
          f"(internal {formats.format_float(report.internal_total)}, "
          f"boundary {formats.format_float(report.boundary_total)})")
    return 0


def _cmd_energy(args) -> int:
    config = RunConfig(command="energy", input_path=args.input, output_path=args.out,
                       alphas=_parse_floats(args.alphas, "--alphas") if args.alphas else (),
                       threads=args.threads).validate()
    _apply_threads(config.threads)
    v = _read_atoms(args.input)
    x = _parse_point(args.point, "--point")
    if args.alphas:
        alphas = list(config.alphas)
    else:
        try:
            lo, hi, num = args.alpha_range.split(":")
            alphas = list(np.geomspace(float(lo), float(hi), int(num)))
        except ValueError as exc:
            raise ValidationError(
                f"alpha-range: expected 'lo:hi:count', got {args.alpha_range!r}") from exc
    alphas = sorted(alphas, reverse=True)
    window = _parse_box(args.window, "--window") if args.window else None
    if args.estimate:
        params = EnergyParams(alpha=min(alphas), r_max=args.r_max, window=window)
        plane = estimate_tangent(x, v, params).plane
    elif args.plane:
        plane = _parse_plane(args.plane, "--plane")
    else:
        raise ValidationError("either --plane or --estimate is required")
    rows = []
    for alpha in alphas:
        params = EnergyParams(alpha=alpha, r_max=args.r_max, window=window)
        rows.append([alpha, energy_alpha(x, plane, v, params).value])
    _write_csv(args.out, ["alpha", "value"], rows)
    print(f"wrote {args.out}: {len(rows)} energy values at point {tuple(x)}")
    return 0


def _cmd_tangent(args) -> int:
    config = RunConfig(command="tangent", input_path=args.input, output_path=args.out,
                       alphas=(args.alpha,), sample=args.sample, seed=args.seed,
                       threads=args.threads).validate()
    _apply_threads(config.threads)
    v = _read_atoms(args.input)
    params = EnergyParams(alpha=args.alpha, r_max=args.r_max)
    points = v.points
    if config.sample is not None and config.sample < v.count:
        rng = np.random.default_rng(config.seed)
        idx = np.sort(rng.choice(v.count, size=config.sample, replace=False))
        points = points[idx]
    entries = tangent_field(points, v, params)
    header = [f"x_{a + 1}" for a in range(v.n)]
    header += [f"b_{k + 1}{a + 1}" for k in range(v.d) for a in range(v.n)]
    header += ["energy", "spectral_gap", "degenerate", "error"]
    if args.oracle:
        header += ["oracle_energy", "oracle_gap"]
    rows = []
    for entry in entries:
        row: list = list(entry.point)
        if entry.estimate is None:
            row += [""] * (v.d * v.n) + ["", "", "", entry.error]
            if args.oracle:
                row += ["", ""]
        else:
            est = entry.estimate
            row += [float(b) for b in est.plane.basis.ravel()]
            row += [est.energy, est.spectral_gap, str(bool(est.degenerate)).lower(), ""]
            if args.oracle:
                _, oracle_energy = grid_search_oracle(entry.point, v, params, args.oracle)
                row += [oracle_energy, oracle_energy - est.energy]
        rows.append(row)
    _write_csv(args.out, header, rows)
    failures = sum(1 for e in entries if e.estimate is None)
    print(f"wrote {args.out}: {len(entries)} points, {failures} failures")
    return 0


def _scale_pipeline(v: AtomicVarifold, box: Box, config: RunConfig, index: int,
                    h: float, with_firstvar: bool):
    """Shared per-scale work: discretize, face sums, atomize, energy, density."""
    alpha = _alpha_for(config, index, h)
    beta_cut = _beta_cut_for(config, h)
    dv = discretize(v, grid_covering(box, h))
    fv_total = first_variation(dv).total if with_firstvar else None
    cloud = atomize(dv, config.q)
    energy = integrated_energy(cloud, cloud, EnergyParams(alpha=alpha),
                               sample=config.sample, seed=config.seed)
    c1, c2 = ahlfors_constants(cloud, beta_cut, sample=config.centers, seed=config.seed)
    return alpha, beta_cut, dv, fv_total, energy, c1, c2


def _cmd_sweep(args) -> int:
    config = RunConfig(command="sweep", input_path=args.input, output_path=args.out,
                       h_list=tuple(_parse_floats(args.h_list, "--h-list")),
                       alpha_exp=args.alpha_exp, beta_cut=args.beta_cut,
                       beta_cut_factor=args.beta_cut_factor, q=args.q, sample=args.sample,
                       centers=args.centers, seed=args.seed, threads=args.threads).validate()
    if config.alpha_exp is None:
        raise ValidationError("alpha-exp: required for sweep")
    _apply_threads(config.threads)
    v = _read_atoms(args.input)
    box = _parse_box(args.domain, "--domain") if args.domain else v.domain
    d = v.d
    guidance = args.beta_holder / (d + 3)
    print(f"alpha rule: alpha_i = delta_i^{args.alpha_exp:g}; "
          f"guidance: exponent p < beta/(d+3) = {guidance:g} keeps the scale rule decreasing")
    rows = []
    rule_values = []
    for index, h in enumerate(config.h_list):
        alpha, _, _, fv_total, energy, c1, c2 = _scale_pipeline(
            v, box, config, index, h, with_firstvar=True)
        assert fv_total is not None
        rows.append([h, alpha, fv_total, h * fv_total, energy, c1, c2])
        rule_values.append(h**args.beta_holder / alpha ** (d + 3))
    decreasing = all(b < a for a, b in zip(rule_values, rule_values[1:]))
    if decreasing:
        print("scale rule: delta^beta/alpha^(d+3) is decreasing across the sweep")
    else:
        print("warning: delta^beta/alpha^(d+3) is nondecreasing across the sweep; "
              f"choose p < beta/(d+3) = {guidance:g}")
    _write_csv(args.out, ["delta", "alpha", "firstvar_total", "h_times_total",
                          "integrated_energy", "c1", "c2"], rows)
    print(f"wrote {args.out}: {len(rows)} scales")
    return 0


def _cmd_regularity(args) -> int:
    config = RunConfig(command="regularity", input_path=args.input, output_path=args.out,
                       h_list=tuple(_parse_floats(args.h_list, "--h-list")),
                       alphas=_parse_floats(args.alphas, "--alphas") if args.alphas else (),
                       alpha_exp=args.alpha_exp, beta_cut=args.beta_cut,
                       beta_cut_factor=args.beta_cut_factor, q=args.q, sample=args.sample,
                       centers=args.centers, seed=args.seed, threads=args.threads).validate()
    if not config.alphas and config.alpha_exp is None:
        raise ValidationError("either --alphas or --alpha-exp is required")
    if config.alphas and len(config.alphas) != len(config.h_list):
        raise ValidationError("alphas: need exactly one value per h-list entry")
    _apply_threads(config.threads)
    v = _read_atoms(args.input)
    box = _parse_box(args.domain, "--domain") if args.domain else v.domain
    seq = []
    for index, h in enumerate(config.h_list):
        alpha = _alpha_for(config, index, h)
        seq.append((discretize(v, grid_covering(box, h)), alpha, _beta_cut_for(config, h)))
    report = hypothesis_report(seq, q=config.q, sample=config.centers, seed=config.seed,
                               energy_sample=config.sample,
                               density_band=args.density_band, energy_band=args.energy_band)
    rows = [[r.delta, r.alpha, r.beta_cut, r.c1, r.c2, r.energy] for r in report.rows]
    _write_csv(args.out, ["delta", "alpha", "beta_cut", "c1", "c2", "integrated_energy"], rows)
    for line in report.verdict.lines():
        print(line)
    print(f"c1_hat = {formats.format_float(report.c1_hat)}, "
          f"c2_hat = {formats.format_float(report.c2_hat)}")
    print("jones integrals at sampled centers: "
          + ", ".join(formats.format_float(j) for j in report.jones_integrals))
    print(f"wrote {args.out}: {len(rows)} scales")
    return 0


# ------------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Rectifiability diagnostics for discrete varifolds.",
        epilog="Run with --schema for the file and CSV formats.")
    parser.add_argument("--schema", action="store_true",
                        help="print all file/CSV formats and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for the compiled backend "
                            "(default: VARIFOLDS_THREADS or backend default)")

    p = sub.add_parser("generate", help="write a synthetic varifold file")
    p.add_argument("--shape", required=True,
                   choices=["line", "circle", "graph", "square-cloud"])
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--a", default="0,0", help="line start (line shape)")
    p.add_argument("--b", default="1,1", help="line end (line shape)")
    p.add_argument("--center", default="0,0", help="circle center")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--graph-fn", default="parabola", choices=sorted(_GRAPH_FUNCTIONS),
                   help="built-in graph function: "
                        + "; ".join(f"{k}: {v[1]}" for k, v in sorted(_GRAPH_FUNCTIONS.items())))
    p.add_argument("--graph-d", type=int, default=1, choices=[1, 2])
    p.add_argument("--grid", type=int, default=1000, help="graph cells per axis")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("discretize", help="aggregate an atomic varifold onto a grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--domain", default=None, help="grid box 'lo1,lo2,...:hi1,hi2,...' "
                                                  "(default: the varifold domain)")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_discretize)

    p = sub.add_parser("firstvar", help="face-sum total variation of the first variation")
    p.add_argument("--in", dest="input", required=True,
                   help="atomic (needs --h) or discrete varifold file")
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--domain", default=None)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_firstvar)

    p = sub.add_parser("energy", help="energy curve (alpha, value) at a point/plane")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--plane", default=None, help="basis rows 'b11,b12;b21,b22'")
    p.add_argument("--estimate", action="store_true",
                   help="use the estimated tangent plane at the smallest alpha")
    p.add_argument("--alphas", default=None, help="comma-separated alphas")
    p.add_argument("--alpha-range", default="0.01:1:16", help="log range 'lo:hi:count'")
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--window", default=None, help="restriction window 'lo...:hi...'")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_energy)

    p = sub.add_parser("tangent", help="tangent-plane field over the atoms")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--sample", type=int, default=None, help="evaluate at k sampled atoms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", type=int, default=None,
                   help="also run the k-sample grid-search oracle per point")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_tangent)

    def scale_flags(p):
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--h-list", required=True, help="decreasing cell sizes 'h1,h2,...'")
        p.add_argument("--alpha-exp", type=float, default=None,
                       help="alpha rule exponent p in alpha = delta^p")
        p.add_argument("--beta-cut", type=float, default=None,
                       help="fixed density cutoff (default: factor * h per scale)")
        p.add_argument("--beta-cut-factor", type=float, default=2.0)
        p.add_argument("--q", type=int, default=3)
        p.add_argument("--sample", type=int, default=None,
                       help="subsample size for the integrated energy")
        p.add_argument("--centers", type=int, default=64,
                       help="sampled centers for the density constants")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--domain", default=None)
        p.add_argument("--out", required=True)
        common(p)

    p = sub.add_parser("sweep", help="multi-scale contrast: face sums vs energies")
    scale_flags(p)
    p.add_argument("--beta-holder", type=float, default=1.0,
                   help="Hoelder exponent beta of the tangent map, for the scale rule")
    p.set_defaults(func=_cmd_sweep, alpha_exp=0.2)

    p = sub.add_parser("regularity", help="hypothesis report across scales")
    scale_flags(p)
    p.add_argument("--alphas", default=None, help="explicit alphas, one per scale")
    p.add_argument("--density-band", type=float, default=4.0)
    p.add_argument("--energy-band", type=float, default=2.0)
    p.set_defaults(func=_cmd_regularity)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        print(SCHEMA, end="")
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"{PROG}: validation error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"{PROG}: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
