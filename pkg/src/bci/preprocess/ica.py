"""
ICA artifact removal.

FastICA (deflation, logcosh/tanh contrast) is fit on the scalp channels of a
whole session. Components whose time courses correlate with an EOG or ECG
reference above the threshold are masked out and the scalp data is rebuilt
from the kept components. The fitted model is frozen and reused verbatim on
online task windows.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.decomposition import FastICA
from sklearn.exceptions import ConvergenceWarning

from core.errors import ErrorCode, FileError, NumericalError, ValidationError
from core.recording import ChannelRole, Recording

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-5
DEFAULT_THRESHOLD = 0.95
# Eigenvalues below this fraction of the largest count as numerically zero
_RANK_RTOL = 1e-10


@dataclass
class IcaModel:
    """
    Fitted ICA decomposition of the scalp channels.

    ``unmixing`` maps centered scalp data to sources (whitening included);
    ``mixing`` maps sources back. ``component_mask`` marks kept components.
    """

    unmixing: np.ndarray
    mixing: np.ndarray
    mean: np.ndarray
    component_mask: np.ndarray
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    converged: bool = True
    n_iter: int = 0
    effective_rank: int = 0
    artifact_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_components(self) -> int:
        return int(self.unmixing.shape[0])

    @property
    def n_channels(self) -> int:
        return int(self.unmixing.shape[1])

    @property
    def rejected(self) -> list[int]:
        return [i for i, kept in enumerate(self.component_mask) if not kept]

    def sources(self, scalp: np.ndarray) -> np.ndarray:
        """Component time courses ``[k × n_samples]`` of a scalp matrix."""
        if scalp.shape[0] != self.n_channels:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH,
                user_message=f"ICA model expects {self.n_channels} scalp channels, got {scalp.shape[0]}",
                field="channels",
            )
        centered = np.asarray(scalp, dtype=np.float64) - self.mean[:, None]
        return np.asarray(self.unmixing @ centered)

    def reconstruct(self, scalp: np.ndarray) -> np.ndarray:
        """Scalp data rebuilt from the kept components only."""
        sources = self.sources(scalp) * self.component_mask[:, None]
        return np.asarray(self.mixing @ sources + self.mean[:, None])


def effective_rank(data: np.ndarray) -> int:
    """Number of covariance eigenvalues above the relative tolerance."""
    centered = data - data.mean(axis=1, keepdims=True)
    eigvals = np.linalg.eigvalsh(np.cov(centered))
    top = float(eigvals.max()) if eigvals.size else 0.0
    if top <= 0:
        return 0
    return int(np.sum(eigvals > top * _RANK_RTOL))


def fit_ica(
    rec: Recording, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL, seed: int = 0
) -> IcaModel:
    """
    Fit FastICA by deflation on the scalp channels.

    Args:
        rec: Filtered and re-referenced session recording
        max_iter: Iteration cap per component
        tol: Convergence tolerance on the weight update
        seed: Seed for the initial weights

    Returns:
        IcaModel with every component kept; ``converged`` is False when the
        iteration cap was hit

    Raises:
        ValidationError: If there are fewer than 10 samples per channel
        NumericalError: If the scalp covariance has rank zero
    """
    scalp = rec.select(ChannelRole.SCALP_EEG).astype(np.float64)
    n_channels, n_samples = scalp.shape
    if n_samples < 10 * n_channels:
        raise ValidationError(
            code=ErrorCode.VALUE_OUT_OF_RANGE,
            user_message=f"ICA needs at least {10 * n_channels} samples for {n_channels} channels, got {n_samples}",
            field="samples",
        )

    rank = effective_rank(scalp)
    if rank == 0:
        raise NumericalError(code=ErrorCode.RANK_DEFICIENT, user_message="Scalp covariance has rank 0; nothing to decompose")
    if rank < n_channels:
        logger.warning(f"Scalp covariance is rank deficient (effective rank {rank} of {n_channels}); fitting {rank} components")

    ica = FastICA(
        n_components=rank,
        algorithm="deflation",
        whiten="unit-variance",
        fun="logcosh",
        max_iter=max_iter,
        tol=tol,
        random_state=seed,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        ica.fit(scalp.T)
    converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    if not converged:
        logger.warning(f"FastICA stopped at max_iter={max_iter} before reaching tol={tol}")

    model = IcaModel(
        unmixing=np.asarray(ica.components_, dtype=np.float64),
        mixing=np.asarray(ica.mixing_, dtype=np.float64),
        mean=np.asarray(ica.mean_, dtype=np.float64),
        component_mask=np.ones(rank, dtype=bool),
        max_iter=max_iter,
        tol=tol,
        converged=converged,
        n_iter=int(ica.n_iter_),
        effective_rank=rank,
    )
    logger.info(f"Fitted ICA with {rank} components in {model.n_iter} iterations")
    return model


def _abs_correlations(sources: np.ndarray, references: np.ndarray) -> np.ndarray:
    """``|Pearson r|`` between each source row and each reference row, ``[k × n_refs]``."""
    def standardize(x: np.ndarray) -> np.ndarray:
        centered = x - x.mean(axis=1, keepdims=True)
        norm = np.linalg.norm(centered, axis=1, keepdims=True)
        return np.divide(centered, norm, out=np.zeros_like(centered), where=norm > 0)

    return np.abs(standardize(sources) @ standardize(references).T)


def reject_artifacts(rec: Recording, ica: IcaModel, threshold: float = DEFAULT_THRESHOLD) -> Recording:
    """
    Remove components that track the EOG or ECG channels.

    A component is rejected when its absolute Pearson correlation with any EOG
    or ECG channel exceeds ``threshold`` over the full session. The rejection
    mask and the per-component scores are stored on ``ica``.

    Returns:
        Recording with scalp rows rebuilt from the kept components

    Raises:
        ValidationError: If the montage lacks EOG or ECG channels
    """
    reference_rows = rec.indices(ChannelRole.EOG) + rec.indices(ChannelRole.ECG)
    if not rec.indices(ChannelRole.EOG) or not rec.indices(ChannelRole.ECG):
        raise ValidationError(
            code=ErrorCode.INVALID_INPUT, user_message="Artifact rejection needs EOG and ECG channels", field="channels"
        )
    scalp = rec.select(ChannelRole.SCALP_EEG).astype(np.float64)
    references = np.asarray(rec.samples[reference_rows], dtype=np.float64)
    scores = _abs_correlations(ica.sources(scalp), references).max(axis=1)

    ica.artifact_scores = scores
    ica.component_mask = ~(scores > threshold)
    if ica.rejected:
        logger.info(f"Rejected ICA components {ica.rejected} (max |r| {scores.max():.3f})")
    return apply_ica(rec, ica)


def apply_ica(rec: Recording, ica: IcaModel) -> Recording:
    """Rebuild the scalp rows of ``rec`` through a frozen ICA model and its mask."""
    samples = np.array(rec.samples, dtype=np.float64)
    rows = rec.indices(ChannelRole.SCALP_EEG)
    samples[rows] = ica.reconstruct(samples[rows])
    return rec.with_samples(samples)


def save_ica(ica: IcaModel, path: Path | str) -> None:
    """Persist an ICA model as a NumPy ``.npz`` archive."""
    np.savez(
        Path(path),
        unmixing=ica.unmixing,
        mixing=ica.mixing,
        mean=ica.mean,
        component_mask=ica.component_mask,
        artifact_scores=ica.artifact_scores,
        meta=np.array([ica.max_iter, ica.tol, float(ica.converged), ica.n_iter, ica.effective_rank], dtype=np.float64),
    )


def load_ica(path: Path | str) -> IcaModel:
    """
    Load an ICA model written by ``save_ica``.

    Raises:
        FileError: If the archive is missing or incomplete
    """
    try:
        with np.load(Path(path)) as archive:
            meta = archive["meta"]
            return IcaModel(
                unmixing=archive["unmixing"],
                mixing=archive["mixing"],
                mean=archive["mean"],
                component_mask=archive["component_mask"].astype(bool),
                artifact_scores=archive["artifact_scores"],
                max_iter=int(meta[0]),
                tol=float(meta[1]),
                converged=bool(meta[2]),
                n_iter=int(meta[3]),
                effective_rank=int(meta[4]),
            )
    except FileNotFoundError as e:
        raise FileError(code=ErrorCode.FILE_NOT_FOUND, user_message=f"ICA model not found: {path}") from e
    except (KeyError, ValueError, OSError) as e:
        raise FileError(code=ErrorCode.INVALID_FORMAT, user_message=f"Corrupt ICA model {path}: {e}") from e
