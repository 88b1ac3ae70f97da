"""Least squares with inference, and multinomial logit by Newton-Raphson."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, EmptyCellError, RankDeficiencyError, SeparationError

MAX_CONDITION = 1e10
LL_SLACK = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    covariance: np.ndarray
    residuals: np.ndarray
    dof: int
    rss: float
    weighted: bool
    r_squared: float
    fitted: np.ndarray
    robust: bool = False

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


def _svd_solve(X, y):
    # Rank-revealing: refuse ill-conditioned designs rather than return garbage.
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s[-1] <= 0 or s[0] / s[-1] > MAX_CONDITION:
        cond = np.inf if s[-1] <= 0 else s[0] / s[-1]
        raise RankDeficiencyError(f"design is rank deficient (condition number {cond:.3g})")
    beta = Vt.T @ ((U.T @ y) / s)
    xtx_inv = (Vt.T / s**2) @ Vt
    return beta, xtx_inv


def _check_shapes(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n <= p:
        raise RankDeficiencyError(f"need more rows than columns (n={n}, p={p})")
    return X, y, n, p


def ols_fit(X, y, robust: bool = False) -> FitResult:
    """Ordinary least squares with classical or HC1 covariance."""
    X, y, n, p = _check_shapes(X, y)
    beta, xtx_inv = _svd_solve(X, y)
    fitted = X @ beta
    e = y - fitted
    dof = n - p
    rss = float(e @ e)
    if robust:
        meat = (X * e[:, None] ** 2).T @ X
        cov = xtx_inv @ meat @ xtx_inv * (n / dof)
    else:
        cov = xtx_inv * (rss / dof)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    return FitResult(beta, (cov + cov.T) / 2, e, dof, rss, False, r2, fitted, robust)


def wls_fit(X, y, w, robust: bool = False) -> FitResult:
    """Weighted least squares minimising ``sum(w * (y - X @ b)**2)``.

    Residuals are on the original scale. ``rss`` is the weighted sum of
    squared residuals and R^2 is taken about the weighted mean of ``y``.
    Rescaling ``w`` by a positive constant leaves every statistic unchanged.
    """
    X, y, n, p = _check_shapes(X, y)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"w has shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be finite and strictly positive")
    sw = np.sqrt(w)
    beta, xtwx_inv = _svd_solve(X * sw[:, None], y * sw)
    fitted = X @ beta
    e = y - fitted
    dof = n - p
    rss = float(w @ e**2)
    if robust:
        meat = (X * (w * e)[:, None] ** 2).T @ X
        cov = xtwx_inv @ meat @ xtwx_inv * (n / dof)
    else:
        cov = xtwx_inv * (rss / dof)
    ybar = float(w @ y / w.sum())
    tss = float(w @ (y - ybar) ** 2)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    return FitResult(beta, (cov + cov.T) / 2, e, dof, rss, True, r2, fitted, robust)


# ---------------------------------------------------------------------------
# multinomial logit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MnlFit:
    """Coefficients are (J-1) x (k+1): one row per non-reference class, intercept first."""

    coefficients: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int
    gradient_norm: float
    n_classes: int

    @property
    def n_covariates(self) -> int:
        return self.coefficients.shape[1] - 1


def _design(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(X.shape[0]), X])


def _scores(B, Z):
    return np.column_stack([np.zeros(Z.shape[0]), Z @ B.T])


def softmax(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def mnl_loglik(B, X, q, J: int) -> float:
    """Log-likelihood of labels ``q`` in 1..J given coefficient matrix ``B``."""
    Z = _design(X)
    S = _scores(np.asarray(B, dtype=float).reshape(J - 1, Z.shape[1]), Z)
    idx = np.asarray(q, dtype=int) - 1
    return float((S[np.arange(len(idx)), idx] - logsumexp(S, axis=1)).sum())


def mnl_gradient(B, X, q, J: int) -> np.ndarray:
    """Analytic gradient of :func:`mnl_loglik`, same shape as ``B``."""
    Z = _design(X)
    B = np.asarray(B, dtype=float).reshape(J - 1, Z.shape[1])
    P = softmax(_scores(B, Z))
    D = np.eye(J)[np.asarray(q, dtype=int) - 1]
    return (D - P)[:, 1:].T @ Z


def _hessian(P, Z):
    # d^2 l / (dB_a dB_b) = -sum_i (delta_ab p_ia - p_ia p_ib) z_i z_i'
    Pn = P[:, 1:]
    m = Pn.shape[1]
    W = -(np.einsum("ia,ab->iab", Pn, np.eye(m)) - np.einsum("ia,ib->iab", Pn, Pn))
    H = np.einsum("iab,ir,is->arbs", W, Z, Z)
    d = m * Z.shape[1]
    return H.reshape(d, d)


def mnl_fit(X, q, J: int, tol: float = 1e-8, max_iter: int = 100,
            max_coef: float = 1e4, callback=None) -> MnlFit:
    """Maximum likelihood multinomial logit, class 1 as reference.

    Newton-Raphson from zero with step halving. Stops when the max-norm of the
    gradient falls below ``tol``; otherwise returns ``converged=False`` after
    ``max_iter`` iterations. ``callback(iteration, B, loglik)`` is called
    after every accepted step.
    """
    Z = _design(X)
    n, p = Z.shape
    q = np.asarray(q, dtype=int)
    if q.shape != (n,):
        raise ValueError(f"labels have shape {q.shape}, expected ({n},)")
    if q.min() < 1 or q.max() > J:
        raise ValueError(f"labels must lie in 1..{J}")
    counts = np.bincount(q - 1, minlength=J)
    if np.any(counts == 0):
        raise EmptyCellError(f"empty class(es): {[j + 1 for j in np.flatnonzero(counts == 0)]}")
    if n <= (J - 1) * p:
        raise ValueError(f"too few observations ({n}) for {(J - 1) * p} parameters")

    D = np.eye(J)[q - 1]
    B = np.zeros((J - 1, p))

    def evaluate(B):
        S = _scores(B, Z)
        lse = logsumexp(S, axis=1)
        ll = float((S[np.arange(n), q - 1] - lse).sum())
        P = np.exp(S - lse[:, None])
        return ll, P

    ll, P = evaluate(B)
    grad = (D - P)[:, 1:].T @ Z
    gnorm = float(np.abs(grad).max())
    it = 0
    while gnorm >= tol and it < max_iter:
        it += 1
        H = _hessian(P, Z)
        try:
            step = np.linalg.solve(-H, grad.ravel()).reshape(B.shape)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(-H, grad.ravel(), rcond=None)[0].reshape(B.shape)
        # Near the optimum the gain from a step drops below the rounding error
        # of the summed log-likelihood; do not let that trigger halving.
        slack = LL_SLACK * (1.0 + abs(ll))
        t = 1.0
        for _ in range(60):
            B_new = B + t * step
            ll_new, P_new = evaluate(B_new)
            if ll_new >= ll - slack:
                break
            t *= 0.5
        else:
            break
        B, ll, P = B_new, ll_new, P_new
        if callback is not None:
            callback(it, B, ll)
        grad = (D - P)[:, 1:].T @ Z
        gnorm = float(np.abs(grad).max())
        if np.abs(B).max() > max_coef and gnorm >= tol:
            raise SeparationError(
                f"coefficients diverged past {max_coef:g} after {it} iterations "
                f"(gradient max-norm {gnorm:.3g}); classes are separable")

    if P[np.arange(n), q - 1].min() > 1 - 1e-8:
        raise SeparationError("labels are perfectly predicted by the covariates")
    if gnorm < tol:
        # A vanishing gradient with a large remaining Newton step means the
        # likelihood is flattening toward a supremum at infinity.
        ahead = np.linalg.lstsq(-_hessian(P, Z), grad.ravel(), rcond=None)[0]
        if np.abs(ahead).max() > 1e-2 * max(1.0, np.abs(B).max()):
            raise SeparationError(
                f"likelihood has no finite maximum (Newton step {np.abs(ahead).max():.3g} "
                f"at vanishing gradient); classes are separable")
    return MnlFit(B, ll, gnorm < tol, it, gnorm, J)


def mnl_predict(fit: MnlFit, X) -> np.ndarray:
    """Class probabilities, one row per observation, columns ordered 1..J."""
    Z = _design(X)
    if Z.shape[1] != fit.coefficients.shape[1]:
        raise ValueError(
            f"X has {Z.shape[1] - 1} columns, model was fitted with {fit.n_covariates}")
    return softmax(_scores(fit.coefficients, Z))


def require_converged(fit: MnlFit) -> MnlFit:
    if not fit.converged:
        raise ConvergenceError(
            f"multinomial logit did not converge in {fit.iterations} iterations "
            f"(gradient max-norm {fit.gradient_norm:.3g}, log-likelihood {fit.log_likelihood:.6g})")
    return fit
