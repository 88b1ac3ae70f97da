"""Monte Carlo laboratory with known treatment effects.

The data-generating process draws covariates ``x ~ N(0, I)``, assigns one of
J treatment levels from a multinomial logit in ``x``, and builds potential
responses ``Y(j) = mu_j + x @ gamma + noise``. Because ``gamma`` is nonzero
and assignment depends on ``x``, unweighted class means are confounded while
inverse-probability-weighted means are not.

Output levels are ``y_t = b_t - theta * g_t`` and ``y_{t+1} = b_t + Y(q_t)``
with ``b_t = 0.5 + z_{t-1} @ (0.8, -0.4)``. The policy growth ``g_t`` is
monotone in the class, so with ``theta != 0`` the realised growth
``y_{t+1} - y_t`` carries ``theta * g_t`` mechanically while the forecast
baseline, built from ``z_{t-1}`` alone, does not.

Replication ``r`` draws from ``numpy.random.SeedSequence(seed, spawn_key=(r,))``
so results do not depend on the order or process in which replications run.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .baseline import fit_baseline
from .data import Panel
from .effects import estimate
from .errors import SpecError
from .propensity import DEFAULT_E_MIN, fit_gps, propensity_from_probs
from .regress import softmax
from .treatment import TreatmentAssignment, classify

MIN_REPLICATIONS = 50
TRUTH_DRAWS = 10**6
_TRUTH_KEY = 2**32 - 1
_BASE_INTERCEPT = 0.5
_BASE_SLOPES = (0.8, -0.4)
_JITTER = 0.25

DEFAULT_PROP_COEFFS = (
    (0.0, 0.25, 0.0, -0.1),
    (0.0, 0.5, 0.1, -0.2),
    (0.0, 0.75, 0.2, -0.3),
)


@dataclass(frozen=True)
class DgpSpec:
    n: int = 2000
    J: int = 4
    mu: tuple[float, ...] = (-1.0, 0.0, 1.0, 2.0)
    prop_coeffs: tuple[tuple[float, ...], ...] = DEFAULT_PROP_COEFFS
    noise_sd: float = 1.0
    theta: float = 0.0
    seed: int = 42
    outcome_coeffs: tuple[float, ...] = (0.5, 0.25, -0.25)
    e_min: float = DEFAULT_E_MIN

    def __post_init__(self):
        B = np.asarray(self.prop_coeffs, dtype=float)
        if self.J < 2:
            raise SpecError(f"J must be at least 2, got {self.J}")
        if len(self.mu) != self.J:
            raise SpecError(f"mu has {len(self.mu)} entries, expected J={self.J}")
        if B.ndim != 2 or B.shape[0] != self.J - 1 or B.shape[1] < 1:
            raise SpecError(f"prop_coeffs must be (J-1) x (k+1) = ({self.J - 1}, k+1), got {B.shape}")
        if len(self.outcome_coeffs) != B.shape[1] - 1:
            raise SpecError(f"outcome_coeffs needs {B.shape[1] - 1} entries, got {len(self.outcome_coeffs)}")
        if self.n < 10 * self.J:
            raise SpecError(f"n must be at least 10*J = {10 * self.J}, got {self.n}")
        if not self.noise_sd > 0:
            raise SpecError(f"noise_sd must be positive, got {self.noise_sd}")
        if not 0 <= self.seed < 2**64:
            raise SpecError("seed must be a non-negative 64-bit integer")
        if not 0 < self.e_min < 1 / self.J:
            raise SpecError(f"e_min must lie in (0, 1/J), got {self.e_min}")

    @property
    def k(self) -> int:
        return len(self.outcome_coeffs)

    def replace(self, **changes) -> "DgpSpec":
        return DgpSpec(**{**asdict(self), **changes})


@dataclass(frozen=True)
class SimulatedData:
    panel: Panel
    labels: np.ndarray
    true_probs: np.ndarray


def growth_centers(J: int) -> np.ndarray:
    """Per-class centre of the simulated policy growth."""
    if J == 4:
        # Keeps the (-sd, 0, sd) bins aligned with the drawn classes.
        return np.array([-3.0, -0.5, 0.5, 3.0])
    return np.linspace(-3.0, 3.0, J)


def _true_probs(spec: DgpSpec, x):
    B = np.asarray(spec.prop_coeffs, dtype=float)
    Z = np.column_stack([np.ones(x.shape[0]), x])
    return softmax(np.column_stack([np.zeros(x.shape[0]), Z @ B.T]))


def _draw_labels(probs, rng):
    u = rng.random(probs.shape[0])
    cdf = np.cumsum(probs, axis=1)
    labels = (u[:, None] > cdf).sum(axis=1) + 1
    return np.minimum(labels, probs.shape[1])


def _draw(spec: DgpSpec, n: int, rng):
    x = rng.standard_normal((n, spec.k))
    probs = _true_probs(spec, x)
    q = _draw_labels(probs, rng)
    g = growth_centers(spec.J)[q - 1] + rng.uniform(-_JITTER, _JITTER, n)
    eps = spec.noise_sd * rng.standard_normal(n)
    return x, probs, q, g, eps


def simulate_dgp(spec: DgpSpec, rng=None) -> SimulatedData:
    """Draw one panel. Identical ``spec`` (and ``rng``) gives identical data."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    x, probs, q, g, eps = _draw(spec, spec.n, rng)
    z = rng.standard_normal((spec.n, len(_BASE_SLOPES)))
    base = _BASE_INTERCEPT + z @ np.array(_BASE_SLOPES)
    potential = np.asarray(spec.mu)[q - 1] + x @ np.asarray(spec.outcome_coeffs) + eps
    panel = Panel(
        t=np.arange(spec.n),
        y=base - spec.theta * g,
        y_next=base + potential,
        g=g,
        x=x,
        z=z,
        x_names=tuple(f"x{i + 1}" for i in range(spec.k)),
        z_names=tuple(f"z{i + 1}" for i in range(len(_BASE_SLOPES))),
    )
    return SimulatedData(panel, q, probs)


def true_effects(spec: DgpSpec, draws: int = TRUTH_DRAWS) -> np.ndarray:
    """mu_j = E[y_{t+1}(j) - yhat_t].

    Exact when ``theta == 0``. Otherwise the baseline absorbs
    ``-theta * E[g]`` and the expectation is taken by brute force over
    ``draws`` simulated periods.
    """
    mu = np.asarray(spec.mu, dtype=float)
    if spec.theta == 0:
        return mu.copy()
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(_TRUTH_KEY,)))
    x, _, _, g, eps = _draw(spec, draws, rng)
    common = x @ np.asarray(spec.outcome_coeffs) + eps
    # y_{t+1}(j) - yhat_t = mu_j + x'gamma + eps + theta * E[g]
    return mu + common.mean() + spec.theta * g.mean()


def _assignment(spec, data):
    if spec.J == 4:
        return classify(data.panel.g)
    return TreatmentAssignment.from_labels(data.labels, spec.J)


def _replicate(args):
    spec, index, propensity, variants = args
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(index,)))
    data = simulate_dgp(spec, rng)
    try:
        assignment = _assignment(spec, data)
        if not np.array_equal(assignment.labels, data.labels):
            raise RuntimeError("growth-rate bins disagree with the drawn treatment levels")
        baseline = fit_baseline(data.panel, "full_sample")
        if propensity == "true":
            prop = propensity_from_probs(data.true_probs, assignment, spec.e_min)
        else:
            prop = fit_gps(data.panel.x, assignment, spec.e_min)
        out = {}
        for v in variants:
            res = estimate(data.panel, baseline, prop, v, "cell_means")
            crit = stats.t.ppf(0.975, data.panel.n - spec.J)
            out[v] = (res.betas, res.std_errors, crit)
        return index, out, None
    except Exception as exc:  # recorded per replication, never fatal
        return index, None, f"{type(exc).__name__}: {exc}"


@dataclass
class McReport:
    replications: int
    failed: int
    true_effects: np.ndarray
    mean_bias: dict[str, np.ndarray]
    mc_std_error: dict[str, np.ndarray]
    coverage: dict[str, np.ndarray]
    rmse: dict[str, np.ndarray]
    a1_worse_share: np.ndarray | None
    estimates: dict[str, np.ndarray] = field(repr=False, default_factory=dict)
    failures: list[tuple[int, str]] = field(default_factory=list)
    spec: DgpSpec | None = None

    def as_dict(self) -> dict:
        doc = {
            "replications": self.replications,
            "failed": self.failed,
            "true_effects": self.true_effects.tolist(),
            "mean_bias": {k: v.tolist() for k, v in self.mean_bias.items()},
            "mc_std_error": {k: v.tolist() for k, v in self.mc_std_error.items()},
            "coverage": {k: v.tolist() for k, v in self.coverage.items()},
            "rmse": {k: v.tolist() for k, v in self.rmse.items()},
            "a1_worse_share": None if self.a1_worse_share is None else self.a1_worse_share.tolist(),
            "failures": [list(f) for f in self.failures],
        }
        if self.spec is not None:
            doc["spec"] = asdict(self.spec)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "variant", "class", "value"])
        for j, v in enumerate(self.true_effects, start=1):
            writer.writerow(["true_effect", "", j, repr(float(v))])
        for metric in ("mean_bias", "mc_std_error", "coverage", "rmse"):
            for variant, values in getattr(self, metric).items():
                for j, v in enumerate(values, start=1):
                    writer.writerow([metric, variant, j, repr(float(v))])
        if self.a1_worse_share is not None:
            for j, v in enumerate(self.a1_worse_share, start=1):
                writer.writerow(["a1_worse_share", "", j, repr(float(v))])
        writer.writerow(["replications", "", "", self.replications])
        writer.writerow(["failed", "", "", self.failed])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"replications: {self.replications} (failed {self.failed})",
                 "true effects: " + " ".join(f"{v:.4f}" for v in self.true_effects)]
        for variant in self.mean_bias:
            lines.append(f"{variant}:")
            lines.append("  mean bias  " + " ".join(f"{v:9.4f}" for v in self.mean_bias[variant]))
            lines.append("  MC s.e.    " + " ".join(f"{v:9.4f}" for v in self.mc_std_error[variant]))
            lines.append("  coverage   " + " ".join(f"{v:9.3f}" for v in self.coverage[variant]))
        if self.a1_worse_share is not None:
            lines.append("share |bias A1| > |bias A2|: "
                         + " ".join(f"{v:.3f}" for v in self.a1_worse_share))
        return "\n".join(lines) + "\n"


def run_experiment(spec: DgpSpec, R: int, n_jobs: int = 1, propensity: str = "estimated",
                   variants=("WLS_A2", "WLS_A1", "OLS_A2")) -> McReport:
    """Run the estimation pipeline on ``R`` independent panels and summarise bias and coverage."""
    if R < MIN_REPLICATIONS:
        raise SpecError(f"R must be at least {MIN_REPLICATIONS}, got {R}")
    if propensity not in ("estimated", "true"):
        raise ValueError("propensity must be 'estimated' or 'true'")
    jobs = [(spec, r, propensity, tuple(variants)) for r in range(R)]
    if n_jobs == 1:
        results = [_replicate(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=max(1, R // (4 * n_jobs))))
    results.sort(key=lambda item: item[0])

    truth = true_effects(spec)
    ok = [out for _, out, err in results if err is None]
    failures = [(i, err) for i, _, err in results if err is not None]
    mean_bias, mc_se, coverage, rmse, est = {}, {}, {}, {}, {}
    for v in variants:
        betas = np.array([out[v][0] for out in ok]).reshape(-1, spec.J)
        ses = np.array([out[v][1] for out in ok]).reshape(-1, spec.J)
        crit = np.array([out[v][2] for out in ok])[:, None] if ok else np.empty((0, 1))
        bias = betas - truth
        est[v] = betas
        mean_bias[v] = bias.mean(axis=0)
        mc_se[v] = bias.std(axis=0, ddof=1) / np.sqrt(len(ok)) if len(ok) > 1 else np.full(spec.J, np.nan)
        coverage[v] = (np.abs(bias) <= crit * ses).mean(axis=0)
        rmse[v] = np.sqrt((bias**2).mean(axis=0))
    worse = None
    if "WLS_A1" in est and "WLS_A2" in est:
        worse = (np.abs(est["WLS_A1"] - truth) > np.abs(est["WLS_A2"] - truth)).mean(axis=0)
    return McReport(R, len(failures), truth, mean_bias, mc_se, coverage, rmse, worse, est, failures, spec)
