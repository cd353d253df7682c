"""
Gradient-trained decoders: a two-hidden-layer MLP on DE features and an
EEGNet-style compact CNN on time-domain windows.

Both train with Adam on softmax cross-entropy using torch autograd. Dropout is
omitted from the CNN so training and inference stay deterministic.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from core.errors import ErrorCode, NumericalError, ValidationError

logger = logging.getLogger(__name__)

Params = dict[str, np.ndarray]

MLP_HIDDEN = (128, 64)


class Mlp(nn.Module):
    """``d -> 128 -> 64 -> k`` with ReLU activations; outputs logits."""

    def __init__(self, n_features: int, n_classes: int) -> None:
        super().__init__()
        h1, h2 = MLP_HIDDEN
        self.net = nn.Sequential(
            nn.Linear(n_features, h1),
            nn.ReLU(),
            nn.Linear(h1, h2),
            nn.ReLU(),
            nn.Linear(h2, n_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)  # type: ignore[no-any-return]


class CompactCnn(nn.Module):
    """
    Temporal conv (8 filters, 64-sample kernel) -> depthwise spatial conv
    (2 per filter) -> average pool -> separable temporal conv -> dense logits,
    with batch normalization after each conv block.
    """

    def __init__(
        self, n_channels: int, n_times: int, n_classes: int, f1: int = 8, depth: int = 2, kernel: int = 64
    ) -> None:
        super().__init__()
        f2 = f1 * depth
        self.temporal = nn.Sequential(
            nn.Conv2d(1, f1, (1, kernel), padding=(0, kernel // 2), bias=False),
            nn.BatchNorm2d(f1),
        )
        self.spatial = nn.Sequential(
            nn.Conv2d(f1, f2, (n_channels, 1), groups=f1, bias=False),
            nn.BatchNorm2d(f2),
            nn.ELU(),
            nn.AvgPool2d((1, 4)),
        )
        self.separable = nn.Sequential(
            nn.Conv2d(f2, f2, (1, 16), padding=(0, 8), groups=f2, bias=False),
            nn.Conv2d(f2, f2, (1, 1), bias=False),
            nn.BatchNorm2d(f2),
            nn.ELU(),
            nn.AvgPool2d((1, 8)),
        )
        with torch.no_grad():
            n_flat = self._features(torch.zeros(1, n_channels, n_times)).shape[1]
        if n_flat == 0:
            raise ValidationError(
                code=ErrorCode.DIMENSION_MISMATCH,
                user_message=f"Windows of {n_times} samples are too short for the compact CNN",
                field="input_shape",
            )
        self.classify = nn.Linear(n_flat, n_classes)

    def _features(self, x: torch.Tensor) -> torch.Tensor:
        x = x.unsqueeze(1)
        x = self.temporal(x)
        x = self.spatial(x)
        x = self.separable(x)
        return torch.flatten(x, start_dim=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classify(self._features(x))  # type: ignore[no-any-return]


def train_network(
    module: nn.Module,
    x: np.ndarray,
    y: np.ndarray,
    *,
    epochs: int,
    learning_rate: float,
    batch_size: int,
    l2: float,
    seed: int,
) -> list[float]:
    """
    Minibatch Adam on softmax cross-entropy.

    Returns:
        Mean training loss per epoch

    Raises:
        NumericalError: If the loss becomes NaN or infinite
    """
    generator = torch.Generator().manual_seed(seed)
    loader = DataLoader(
        TensorDataset(torch.as_tensor(x, dtype=torch.float32), torch.as_tensor(y, dtype=torch.long)),
        batch_size=batch_size,
        shuffle=True,
        generator=generator,
    )
    optimizer = torch.optim.Adam(module.parameters(), lr=learning_rate, weight_decay=l2)
    loss_fn = nn.CrossEntropyLoss()
    history: list[float] = []

    module.train()
    for epoch in range(epochs):
        total = 0.0
        for batch, (xb, yb) in enumerate(loader):
            optimizer.zero_grad()
            loss = loss_fn(module(xb), yb)
            value = float(loss.item())
            if not math.isfinite(value):
                raise NumericalError(
                    code=ErrorCode.NAN_LOSS,
                    user_message=f"Training loss became {value} at epoch {epoch}, batch {batch}",
                    context={"epoch": epoch, "batch": batch, "learning_rate": learning_rate, "last_losses": history[-5:]},
                )
            loss.backward()
            optimizer.step()
            total += value * xb.shape[0]
        history.append(total / len(loader.dataset))  # type: ignore[arg-type]
        if epoch % 100 == 0 or epoch == epochs - 1:
            logger.debug(f"{type(module).__name__} epoch {epoch}: loss {history[-1]:.4f}")
    module.eval()
    return history


def freeze_state(module: nn.Module) -> Params:
    """Floating-point state (weights and batch-norm statistics) as float32 arrays."""
    return {
        name: tensor.detach().cpu().numpy().astype(np.float32)
        for name, tensor in module.state_dict().items()
        if tensor.is_floating_point()
    }


def load_state(module: nn.Module, params: Params) -> nn.Module:
    """
    Load frozen float32 parameters and switch to float64 evaluation mode.

    Raises:
        ValidationError: If parameter names or shapes do not fit the module
    """
    expected = {name: tuple(t.shape) for name, t in module.state_dict().items() if t.is_floating_point()}
    given = {name: tuple(a.shape) for name, a in params.items()}
    if expected != given:
        raise ValidationError(
            code=ErrorCode.KIND_MISMATCH,
            user_message=f"Parameters do not fit {type(module).__name__}",
            technical_message=f"expected {expected}, got {given}",
        )
    state = {name: torch.from_numpy(np.array(array, dtype=np.float32)) for name, array in params.items()}
    module.load_state_dict(state, strict=False)
    return module.double().eval()


def network_logits(module: nn.Module, x: np.ndarray) -> np.ndarray:
    """Float64 logits of a module in evaluation mode."""
    with torch.no_grad():
        return module(torch.as_tensor(np.asarray(x, dtype=np.float64))).numpy()  # type: ignore[no-any-return]
