"""Declarative convergence studies: ladders, rate fits, CSV emission, presets."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ErrorReport, Setup, error_report, mc_weak_error
from .noise import CovarianceSpec, LevyLaw, hs_condition
from .propagators import EquationKind, heat_kind, volterra_kind, wave_kind
from .spectral import assemble_fem, dirichlet_spectrum

# Covariance decay is derived from the regularity target with this margin:
# decay = beta - 1/rho + 1/2 + REG_MARGIN places the summability exponent at
# 2*(decay + 1/rho - beta) = 1 + 2*REG_MARGIN, just inside convergence.
REG_MARGIN = 0.05

SLOPE_TOL = 0.15
FIT_FLOOR = 1e-13

CSV_COLUMNS = (
    "level",
    "resolution",
    "strong",
    "weak_quad",
    "representation",
    "mc_estimate",
    "mc_stderr",
    "in_fit",
)


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class ExpectedRates:
    """Guaranteed (lower-bound) convergence exponents per equation family."""

    spatial_weak: float
    temporal_weak: float
    spatial_strong: float
    temporal_strong: float
    beta_in_range: bool = True

    def weak(self, axis: str) -> float:
        return self.spatial_weak if axis == "spatial" else self.temporal_weak

    def strong(self, axis: str) -> float:
        return self.spatial_strong if axis == "spatial" else self.temporal_strong


def expected_rates(kind: EquationKind, beta: float, p: int | None = None, r: int = 2) -> ExpectedRates:
    """Theoretical exponents; beta outside the covered range flags a warning
    but the formulas are still evaluated.  For the wave family p defaults to
    the classical order of the configured scheme (Crank-Nicolson 2, backward
    Euler 1)."""
    if kind.name == "heat":
        return ExpectedRates(2 * beta, beta, beta, beta / 2, beta_in_range=0 < beta <= 1)
    if kind.name == "volterra":
        rho = kind.rho
        return ExpectedRates(2 * beta, rho * beta, beta, rho * beta / 2, beta_in_range=0 < beta <= 1 / rho)
    if p is None:
        p = 1 if kind.scheme == "backward_euler" else 2
    return ExpectedRates(
        min(2 * beta * r / (r + 1), r),
        min(2 * beta * p / (p + 1), 1.0),
        min(beta * r / (r + 1), r),
        min(beta * p / (p + 1), 1.0),
        beta_in_range=beta > 0,
    )


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    levels_used: int


def fit_rate(resolutions: np.ndarray, errors: np.ndarray) -> RateFit:
    """Least-squares slope of log|error| against log resolution.

    Levels with |error| below the floor guard are excluded; fewer than three
    usable levels is an error.
    """
    res = np.asarray(resolutions, float)
    err = np.abs(np.asarray(errors, float))
    keep = err > FIT_FLOOR
    if keep.sum() < 3:
        raise InsufficientDataError(f"only {int(keep.sum())} levels above the error floor; need >= 3")
    x = np.log(res[keep])
    y = np.log(err[keep])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(slope=float(slope), intercept=float(intercept), r_squared=r2, levels_used=int(keep.sum()))


@dataclass(frozen=True)
class StudyConfig:
    """A convergence-study declaration.

    axis "temporal": ladder entries are time steps dt on the spectral-Galerkin
    space.  axis "spatial": ladder entries are mesh widths h = 1/M with the
    time-exact family on the FEM eigenpairs (fixed_cells adds a time scheme).
    Covariance decay defaults to the regularity-target derivation; pass
    cov_decay to override.
    """

    name: str
    kind: EquationKind
    axis: str
    beta: float
    T: float = 1.0
    modes: int = 1024
    ladder: tuple[float, ...] = ()
    fixed_cells: int | None = None
    cov_amplitude: float = 1.0
    cov_decay: float | None = None
    law: LevyLaw = field(default_factory=lambda: LevyLaw("compound_poisson", intensity=1.0))
    x0: tuple | None = None
    g: str = "quadratic"
    g_mode: int = 1
    mc_paths: int | None = None
    mc_seed: int = 0
    threads: int = 1
    exact_scheme: bool = False

    def __post_init__(self):
        if self.axis not in ("temporal", "spatial"):
            raise ValueError(f"axis must be temporal or spatial, got {self.axis!r}")
        if len(self.ladder) < 4:
            raise ValueError("ladder needs at least 4 levels")
        if np.any(np.diff(self.ladder) >= 0):
            raise ValueError("ladder must be strictly decreasing")
        if self.g not in ("quadratic", "cylindrical_cos"):
            raise ValueError(f"unknown test functional {self.g!r}")
        if self.axis == "spatial":
            for h in self.ladder:
                m = 1.0 / h
                if abs(m - round(m)) > 1e-9 or round(m) < 2:
                    raise ValueError(f"spatial ladder entry {h} is not 1/M for integer M >= 2")
                if round(m) - 1 > self.modes:
                    raise ValueError(
                        f"mesh 1/{int(round(m))} outruns the spectral truncation K={self.modes}; raise modes"
                    )

    @property
    def decay(self) -> float:
        if self.cov_decay is not None:
            return self.cov_decay
        rho = self.kind.rho if self.kind.name == "volterra" else 1.0
        return self.beta - 1.0 / rho + 0.5 + REG_MARGIN

    def covariance(self) -> CovarianceSpec:
        return CovarianceSpec(amplitude=self.cov_amplitude, decay=self.decay)

    def expected(self) -> ExpectedRates:
        return expected_rates(self.kind, self.beta)


@dataclass(frozen=True)
class StudyRow:
    level: int
    resolution: float
    report: ErrorReport
    in_fit: bool


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    rows: tuple[StudyRow, ...]
    strong_fit: RateFit | None
    weak_fit: RateFit | None
    tail_fraction: float

    def summary(self) -> dict:
        exp = self.config.expected()
        axis = self.config.axis
        weak = self.weak_fit.slope if self.weak_fit else float("nan")
        strong = self.strong_fit.slope if self.strong_fit else float("nan")
        return {
            "study": self.config.name,
            "weak_slope": weak,
            "weak_expected": exp.weak(axis),
            "weak_ok": bool(weak >= exp.weak(axis) - SLOPE_TOL),
            "strong_slope": strong,
            "strong_expected": exp.strong(axis),
            "strong_ok": bool(abs(strong - exp.strong(axis)) <= SLOPE_TOL),
            "beta_in_range": exp.beta_in_range,
        }

    def passed(self) -> bool:
        s = self.summary()
        return bool(s["weak_ok"] and s["strong_ok"])


def _level_setup(config: StudyConfig, resolution: float) -> Setup:
    spec = dirichlet_spectrum(config.modes)
    cov = config.covariance()
    x0 = None if config.x0 is None else np.asarray(config.x0, float)
    if config.axis == "temporal":
        n = int(round(config.T / resolution))
        return Setup(
            config.kind, spec, cov, config.law, config.T, n_cells=n, x0=x0, exact_scheme=config.exact_scheme
        )
    fem = assemble_fem(int(round(1.0 / resolution)))
    return Setup(
        config.kind,
        spec,
        cov,
        config.law,
        config.T,
        n_cells=config.fixed_cells,
        fem=fem,
        x0=x0,
        exact_scheme=config.exact_scheme,
    )


def run_study(config: StudyConfig) -> StudyResult:
    """Compute every ladder level and fit the rates.

    Deterministic columns are bitwise reproducible for a fixed build; the MC
    columns are reproducible for a fixed seed.
    """
    spec = dirichlet_spectrum(config.modes)
    rho = config.kind.rho if config.kind.name == "volterra" else 1.0
    hs = hs_condition(spec, config.covariance(), config.beta, rho)
    if hs.converges is False:
        expo = 2.0 * (config.decay + 1.0 / rho - config.beta)
        raise ValueError(
            f"study {config.name!r} refused: covariance too rough for beta={config.beta} "
            f"(summability exponent {expo:.4g} <= 1)"
        )
    tail_fraction = float(hs.tail_bound / hs.partial_sum) if hs.tail_bound is not None else float("nan")
    g = None
    if config.g == "cylindrical_cos":
        from .errors import CylindricalFunctional

        g = CylindricalFunctional(mode=config.g_mode)
    rows = []
    for level, resolution in enumerate(config.ladder):
        setup = _level_setup(config, resolution)
        setup.validate_regularity(config.beta)
        rep = error_report(setup)
        if config.mc_paths:
            est, se = mc_weak_error(setup, g=g, n_paths=config.mc_paths, seed=config.mc_seed, threads=config.threads)
            rep = ErrorReport(rep.strong_error, rep.weak_error_quadratic, rep.representation_value, est, se)
        in_fit = abs(rep.weak_error_quadratic) > FIT_FLOOR and rep.strong_error > FIT_FLOOR
        rows.append(StudyRow(level=level, resolution=resolution, report=rep, in_fit=in_fit))
    res = np.array([r.resolution for r in rows])
    try:
        strong_fit = fit_rate(res, [r.report.strong_error for r in rows])
        weak_fit = fit_rate(res, [r.report.weak_error_quadratic for r in rows])
    except InsufficientDataError:
        strong_fit = weak_fit = None  # exact-scheme injection floors every level
    return StudyResult(config=config, rows=tuple(rows), strong_fit=strong_fit, weak_fit=weak_fit, tail_fraction=tail_fraction)


# ----------------------------------------------------------------------------
# CSV


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.17g}"


def csv_text(result: StudyResult) -> str:
    buf = io.StringIO()
    c = result.config
    buf.write(f"# study={c.name} equation={c.kind.name} axis={c.axis} beta={_fmt(c.beta)}\n")
    buf.write(f"# covariance: amplitude={_fmt(c.cov_amplitude)} decay={_fmt(c.decay)} modes={c.modes}\n")
    buf.write(f"# law={c.law.kind} mc_seed={c.mc_seed} mc_paths={c.mc_paths or 0}\n")
    buf.write(f"# covariance_tail_fraction={_fmt(result.tail_fraction)}\n")
    if result.weak_fit and result.strong_fit:
        buf.write(
            f"# fits: weak_slope={_fmt(result.weak_fit.slope)} strong_slope={_fmt(result.strong_fit.slope)}"
            f" weak_r2={_fmt(result.weak_fit.r_squared)} strong_r2={_fmt(result.strong_fit.r_squared)}\n"
        )
    else:
        buf.write("# fits: unavailable (every level at the error floor)\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in result.rows:
        rep = r.report
        buf.write(
            ",".join(
                [
                    str(r.level),
                    _fmt(r.resolution),
                    _fmt(rep.strong_error),
                    _fmt(rep.weak_error_quadratic),
                    _fmt(rep.representation_value),
                    _fmt(rep.mc_estimate),
                    _fmt(rep.mc_stderr),
                    str(int(r.in_fit)),
                ]
            )
            + "\n"
        )
    return buf.getvalue()


def emit_csv(result: StudyResult, path: str) -> None:
    text = csv_text(result)
    with open(path, "w") as f:
        f.write(text)


def read_csv(path_or_text: str, is_text: bool = False) -> list[dict]:
    """Parse a study CSV back into row dicts (floats bitwise-identical)."""
    text = path_or_text if is_text else open(path_or_text).read()
    rows = []
    header: list[str] | None = None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            if tuple(header) != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header {header}")
            continue
        parts = line.split(",")
        row: dict = {}
        for name, val in zip(header, parts):
            if name in ("level", "in_fit"):
                row[name] = int(val)
            else:
                row[name] = float(val) if val else None
        rows.append(row)
    return rows


# ----------------------------------------------------------------------------
# representation-identity sweep


def representation_sweep() -> list[dict]:
    """Compare the error-representation value against the Ito-isometry weak
    error on 12 setups: 3 equations x 2 resolutions x 2 covariances, with
    nonzero initial data throughout."""
    from .errors import representation_quadratic, weak_error_quadratic

    kinds = [heat_kind(), volterra_kind(1.5), wave_kind("crank_nicolson")]
    out = []
    for kind in kinds:
        for n_cells in (8, 32):
            for decay in (0.3, 0.7):
                spec = dirichlet_spectrum(48)
                cov = CovarianceSpec(amplitude=1.0, decay=decay)
                law = LevyLaw("compound_poisson", intensity=1.0)
                if kind.name == "wave":
                    x0 = np.zeros((2, 48))
                    x0[0, :3] = [1.0, -0.5, 0.25]
                    x0[1, :2] = [0.5, 0.125]
                else:
                    x0 = np.zeros(48)
                    x0[:3] = [1.0, -0.5, 0.25]
                setup = Setup(kind, spec, cov, law, 1.0, n_cells=n_cells, x0=x0)
                weak = weak_error_quadratic(setup)
                rep = representation_quadratic(setup)
                rel = abs(rep - weak) / max(abs(weak), 1e-14)
                out.append(
                    {
                        "equation": kind.name,
                        "n_cells": n_cells,
                        "decay": decay,
                        "weak": weak,
                        "representation": rep,
                        "rel_discrepancy": rel,
                    }
                )
    return out


# ----------------------------------------------------------------------------
# shipped presets


def _dyadic(lo: int, hi: int) -> tuple[float, ...]:
    return tuple(2.0**-p for p in range(lo, hi + 1))


def preset_studies() -> dict[str, StudyConfig]:
    """The canonical convergence studies; names are CLI-addressable."""
    presets = [
        StudyConfig(
            name="heat-temporal-beta1",
            kind=heat_kind(),
            axis="temporal",
            beta=1.0,
            modes=4096,
            ladder=_dyadic(4, 10),
        ),
        StudyConfig(
            name="heat-spatial-beta075",
            kind=heat_kind(),
            axis="spatial",
            beta=0.75,
            modes=4096,
            ladder=_dyadic(2, 7),
        ),
        StudyConfig(
            name="volterra-temporal",
            kind=volterra_kind(1.5),
            axis="temporal",
            beta=0.5,
            modes=1024,
            ladder=_dyadic(4, 10),
        ),
        StudyConfig(
            name="wave-temporal",
            kind=wave_kind("crank_nicolson"),
            axis="temporal",
            beta=0.75,
            modes=1024,
            ladder=_dyadic(4, 10),
        ),
        StudyConfig(
            name="wave-spatial",
            kind=wave_kind("crank_nicolson"),
            axis="spatial",
            beta=0.75,
            modes=1024,
            ladder=_dyadic(2, 7),
        ),
        StudyConfig(
            name="wave-temporal-mc",
            kind=wave_kind("crank_nicolson"),
            axis="temporal",
            beta=0.75,
            modes=32,
            ladder=_dyadic(3, 6),
            mc_paths=2000,
            mc_seed=0,
        ),
    ]
    return {p.name: p for p in presets}
