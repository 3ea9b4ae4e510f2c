"""``pgt`` command line: analyze, scan, fit and report.

Exit codes: 0 success, 2 invalid config or CSV, 3 inconclusive K_I,
4 empty arrival-time frontier.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, fields
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

import mpmath

from pgt.chain_models import ChainSpec, Family, SpecificationError
from pgt.diophantine import Budget, ScalingDataset
from pgt.number_theory import DEFAULT_HEIGHT, InconclusiveError, rational_check
from pgt.pipeline import Analysis, analyze, run, spectrum_bits
from pgt.scaling import FitResult, Thresholds, fit_power_law
from pgt.svg import loglog_svg

EXIT_OK, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_EMPTY = 0, 2, 3, 4
CSV_HEADER = ["q", "t", "P", "epsilon"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat ``key = value`` experiment description."""

    family: str
    n_spins: int | None = None
    n_cells: int | None = None
    j: str = "1"
    j1: str = "1"
    j2: str = "1"
    v: str = "1"
    w: str = "1"
    g: str = "1"
    source: int | None = None
    target: int | None = None
    label: str = ""
    precision_bits: int | None = None
    height_limit: int = DEFAULT_HEIGHT
    q_limit: int = Budget.q_limit
    max_records: int = Budget.max_records
    scan_limit: int = Budget.scan_limit
    radius: int = Budget.radius
    workers: int = 1
    refine: bool = False
    eps_cut: float = 0.1
    fit_tolerance: float = 0.15
    min_r2: float = 0.98
    eps_pgt: float = Thresholds.eps_pgt
    sup_bound: float = Thresholds.sup_bound
    digits: int = 30
    csv: str | None = None
    svg: str | None = None
    report: str | None = None

    def spec(self) -> ChainSpec:
        fam = Family.parse(self.family)
        src = self.source or 1

        def couplings(text: str):
            parts = [p.strip() for p in text.split(",")]
            return parts if len(parts) > 1 else parts[0]

        if fam is Family.DECORATED_SSH:
            n_cells = self.n_cells
            if n_cells is None:
                if self.n_spins is None or (self.n_spins - 2) % 3:
                    raise ConfigError("ssh needs n_cells, or n_spins = 3 * n_cells + 2")
                n_cells = (self.n_spins - 2) // 3
            return ChainSpec.ssh(n_cells, couplings(self.v), couplings(self.w), couplings(self.g), src, self.target)
        if self.n_spins is None:
            raise ConfigError(f"{fam.value} needs n_spins")
        if fam is Family.XX:
            return ChainSpec.xx(self.n_spins, couplings(self.j), src, self.target)
        return ChainSpec.staggered(self.n_spins, self.j1, self.j2, src, self.target)

    def budget(self) -> Budget:
        return Budget(
            q_limit=self.q_limit,
            max_records=self.max_records,
            scan_limit=self.scan_limit,
            radius=self.radius,
            workers=self.workers,
            refine=self.refine,
        )

    def thresholds(self) -> Thresholds:
        return Thresholds(eps_pgt=self.eps_pgt, sup_bound=self.sup_bound)


def _to_int(key: str, text: str) -> int:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if value != value.to_integral_value():
        raise ConfigError(f"{key}: expected an integer, got {text!r}")
    return int(value)


def _convert(key: str, kind, text: str):
    kinds = {kind} if isinstance(kind, type) else set(str(kind).replace(" ", "").split("|"))
    if "bool" in kinds or kind is bool:
        if text.lower() not in ("true", "false", "yes", "no", "1", "0"):
            raise ConfigError(f"{key}: expected a boolean, got {text!r}")
        return text.lower() in ("true", "yes", "1")
    if "int" in kinds or kind is int:
        return _to_int(key, text)
    if "float" in kinds or kind is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    return text


def parse_config(text: str, env: dict[str, str] | None = None) -> ExperimentConfig:
    """Parse and validate a config; ``PGT_PRECISION`` and ``PGT_THREADS`` override it."""
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, known[key], value)
    env = os.environ if env is None else env
    if env.get("PGT_PRECISION"):
        values["precision_bits"] = _to_int("PGT_PRECISION", env["PGT_PRECISION"])
    if env.get("PGT_THREADS"):
        values["workers"] = _to_int("PGT_THREADS", env["PGT_THREADS"])
    if "family" not in values:
        raise ConfigError("missing required key 'family'")
    cfg = ExperimentConfig(**values)
    for key in ("q_limit", "max_records", "height_limit", "digits", "workers"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key} must be positive")
    if cfg.q_limit < 2:
        raise ConfigError("q_limit must be >= 2")
    try:
        cfg.spec()
    except SpecificationError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


# -- rendering ------------------------------------------------------------------


def closed_form(x, height: int = 10**6) -> str:
    """``p/q`` or ``sqrt(a)/b`` when ``x`` or ``x**2`` is a small rational, else decimals."""
    with mpmath.workprec(512):
        x = mpmath.mpf(x)
        sign = "-" if x < 0 else ""
        frac = rational_check(abs(x), height)
        if frac is not None:
            return f"{sign}{frac}" if frac else "0"
        sq = rational_check(x * x, height)
    if sq is not None and sq > 0:
        # x = sqrt(n/d) = s*sqrt(r)/d with n*d = s**2 * r
        radicand, den = sq.numerator * sq.denominator, sq.denominator
        root = 1
        f = 2
        while f * f <= radicand and f < 10**4:
            while radicand % (f * f) == 0:
                radicand //= f * f
                root *= f
            f += 1
        coef = Fraction(root, den)
        lead = "" if coef.numerator == 1 else f"{coef.numerator}*"
        tail = "" if coef.denominator == 1 else f"/{coef.denominator}"
        body = f"sqrt({radicand})" if radicand > 1 else "1"
        return f"{sign}{lead}{body}{tail}"
    return mpmath.nstr(x, 20)


def render_analysis(an: Analysis) -> str:
    fa, form = an.frequencies, an.form
    out = io.StringIO()
    w = out.write
    w(f"chain: {an.spec.describe()}\n")
    w(f"spectrum ({an.spectrum.precision_bits} bits):\n")
    for lam in an.spectrum.eigenvalues:
        w(f"  {mpmath.nstr(lam, 25):>32}   {closed_form(lam) if abs(lam) > 1e-30 else '0'}\n")
    w(f"transfer form ({form.kind}), normalization {mpmath.nstr(form.normalization(), 20)}:\n")
    if form.general_form:
        for wt, lam in form.eigenterms:
            w(f"  {mpmath.nstr(wt, 20):>28} * exp(-i {mpmath.nstr(lam, 20)} t)\n")
    else:
        w(f"  a0 = {mpmath.nstr(form.constant, 20)}\n")
        for t in form.terms:
            w(f"  {mpmath.nstr(t.weight, 20):>28} * {t.trig}({closed_form(t.frequency)} t)\n")
    w("frequencies:\n")
    rational = dict(fa.rational_part)
    for j, x in enumerate(fa.frequencies):
        kind = f"rational {rational[j]}" if j in rational else "irrational"
        w(f"  x{j + 1} = {closed_form(x):<20} {kind}\n")
    w(f"relations (height <= {fa.height_limit}, certified at {fa.certificate_precision} bits):\n")
    for r in fa.relations:
        w(f"  {fa.describe_relation(r)}\n")
    if not fa.relations:
        w("  none\n")
    if fa.unexplored:
        w(f"  unexplored (beyond height): {len(fa.unexplored)}\n")
    w(f"K_I = {fa.k_i}\n")
    det = an.determinant
    w(
        f"determinant diagnostic: det = {mpmath.nstr(det.value, 15)}, positive levels = {det.positive_levels}, "
        f"[N/2] bound = {det.bound}, K_I within bound: {det.within_bound}\n"
    )
    if fa.k_i == 0 and abs(form.normalization() - 1) < 1e-9:
        w("note: all frequencies rational; candidate for perfect state transfer\n")
    return out.getvalue()


def render_dataset(ds: ScalingDataset) -> str:
    lines = [
        f"grid: t = q*pi/{ds.grid}" if ds.grid else "grid: none (sign alignment infeasible)",
        f"residue classes: {ds.n_classes}, candidates: {ds.n_candidates}, frontier points: {len(ds.points)}",
        f"sup P: {ds.sup_probability:.15g} (q <= {ds.q_limit})",
    ]
    if ds.perfect_transfer:
        lines.append(f"perfect state transfer at t = {ds.points[0].q}*pi/{ds.grid} (epsilon = 0)")
    if ds.diagnostic:
        lines.append(f"diagnostic: {ds.diagnostic}")
    return "\n".join(lines) + "\n"


def dataset_csv(ds: ScalingDataset, digits: int = 30) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in sorted(ds.points, key=lambda p: p.q):
        writer.writerow([p.q, mpmath.nstr(p.t, digits), mpmath.nstr(p.probability, digits), mpmath.nstr(p.epsilon, digits)])
    return buf.getvalue()


def read_csv(path: str | Path) -> list[tuple[int, mpmath.mpf, mpmath.mpf, mpmath.mpf]]:
    """Rows of a scan CSV as ``(q, t, P, epsilon)``; raises :class:`ConfigError` when malformed."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read CSV: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ConfigError(f"CSV header must be exactly {','.join(CSV_HEADER)}")
    out = []
    with mpmath.workprec(256):
        for n, row in enumerate(rows[1:], 2):
            if len(row) != 4:
                raise ConfigError(f"CSV line {n}: expected 4 fields")
            try:
                out.append((int(row[0]), mpmath.mpf(row[1]), mpmath.mpf(row[2]), mpmath.mpf(row[3])))
            except ValueError:
                raise ConfigError(f"CSV line {n}: cannot parse {row!r}") from None
    return out


def render_fit(fit: FitResult) -> str:
    if math.isnan(fit.alpha):
        return f"fit: insufficient data ({fit.n_points} usable points)\n"
    return f"fit: {fit.summary()}\n  t = {fit.prefactor:.6g} * eps^(-{fit.alpha:.4f})\n"


def _svg_path(args, cfg: ExperimentConfig | None, fallback: str) -> Path:
    if getattr(args, "svg", None):
        return Path(args.svg)
    if cfg is not None and cfg.svg:
        return Path(cfg.svg)
    return Path(fallback)


# -- commands -------------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    bits = spectrum_bits(cfg.height_limit, cfg.q_limit, cfg.precision_bits)
    an = analyze(cfg.spec(), bits, cfg.height_limit)
    _emit(render_analysis(an), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    result = run(cfg.spec(), cfg.budget(), cfg.thresholds(), cfg.height_limit, cfg.precision_bits, cfg.eps_cut)
    ds = result.dataset
    sys.stderr.write(render_dataset(ds))
    if not ds.points:
        sys.stderr.write(f"empty frontier: {result.verdict}\n")
        return EXIT_EMPTY
    out = args.out or cfg.csv
    _emit(dataset_csv(ds, cfg.digits), out)
    if args.plot:
        fit = result.fit
        path = _svg_path(args, cfg, str(Path(out).with_suffix(".svg")) if out else "scan.svg")
        path.write_text(
            loglog_svg(ds.epsilons(), ds.times(), fit.alpha, fit.prefactor, fit.reference, cfg.spec().describe())
        )
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = load_config(args.config) if args.config else None
    path = args.csv or (cfg.csv if cfg else None)
    if not path:
        raise ConfigError("fit needs --csv or a config with a csv key")
    rows = read_csv(path)
    k_i = args.k_i
    if k_i is None and cfg is not None:
        k_i = analyze(cfg.spec(), spectrum_bits(cfg.height_limit, cfg.q_limit, cfg.precision_bits), cfg.height_limit).frequencies.k_i
    eps_cut = args.eps_cut if args.eps_cut is not None else (cfg.eps_cut if cfg else 0.1)
    tol = cfg.fit_tolerance if cfg else 0.15
    min_r2 = cfg.min_r2 if cfg else 0.98
    fit = fit_power_law([(e, t) for _, t, _, e in rows], k_i, eps_cut, tol, min_r2)
    _emit(render_fit(fit), args.out)
    if args.plot:
        svg = _svg_path(args, cfg, str(Path(path).with_suffix(".svg")))
        eps = [float(e) for *_, e in rows]
        times = [float(t) for _, t, _, _ in rows]
        svg.write_text(loglog_svg(eps, times, fit.alpha, fit.prefactor, fit.reference, Path(path).stem))
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    result = run(
        cfg.spec(),
        cfg.budget(),
        cfg.thresholds(),
        cfg.height_limit,
        cfg.precision_bits,
        cfg.eps_cut,
        cfg.fit_tolerance,
        cfg.min_r2,
    )
    ds = result.dataset
    text = render_analysis(result.analysis) + render_dataset(ds) + render_fit(result.fit)
    text += f"verdict: {result.verdict}\n"
    _emit(text, args.out or cfg.report)
    if cfg.csv and ds.points:
        Path(cfg.csv).write_text(dataset_csv(ds, cfg.digits))
    if args.plot and len([p for p in ds.points if p.epsilon > 0]) >= 1:
        path = _svg_path(args, cfg, "report.svg")
        path.write_text(
            loglog_svg(
                ds.epsilons(), ds.times(), result.fit.alpha, result.fit.prefactor, result.fit.reference,
                cfg.spec().describe(),
            )
        )
    return EXIT_OK


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pgt", description="Arrival-time scaling of pretty good transmission.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (
        ("analyze", cmd_analyze, "spectrum, transfer form and K_I"),
        ("scan", cmd_scan, "arrival-time frontier as CSV"),
        ("fit", cmd_fit, "power-law fit of a scan CSV"),
        ("report", cmd_report, "full pipeline with verdict"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=name != "fit", help="key = value experiment file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--plot", action="store_true", help="also write an SVG log-log plot")
        p.add_argument("--svg", help="SVG path used with --plot")
        if name == "fit":
            p.add_argument("--csv", help="scan CSV (q,t,P,epsilon)")
            p.add_argument("--k-i", type=int, dest="k_i", help="K_I for the reference exponent K_I/2")
            p.add_argument("--eps-cut", type=float, dest="eps_cut", help="largest epsilon used in the fit")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"pgt: invalid input: {exc}\n")
        return EXIT_CONFIG
    except InconclusiveError as exc:
        sys.stderr.write(f"pgt: K_I inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
