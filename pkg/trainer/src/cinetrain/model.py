"""Torch twin of the consumer's inference network.

The module tree is named so that ``state_dict()`` keys equal the layer names
in the weights file: ``stem``, ``time_mlp.fc{1,2}``,
``b{1,2,3}.{conv1,time_proj,conv2}``, ``head``. 26 tensors, 70627 parameters
at group 3. Keep the forward pass in lock-step with the consumer's: any
divergence shows up in the parity fixture.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

EMBED_DIM = 32
HIDDEN = 32
TIME_DIM = 64
N_BLOCKS = 3


def time_embedding(timesteps: torch.Tensor) -> torch.Tensor:
    """Half sin / half cos, computed in float64 then cast, [B] -> [B, 32]."""
    half = EMBED_DIM // 2
    freqs = torch.pow(
        torch.tensor(10000.0, dtype=torch.float64),
        -2.0 * torch.arange(half, dtype=torch.float64) / EMBED_DIM,
    )
    args = timesteps.to(torch.float64)[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1).to(torch.float32)


class TimeMLP(nn.Module):
    def __init__(self):
        super().__init__()
        self.fc1 = nn.Linear(EMBED_DIM, TIME_DIM)
        self.fc2 = nn.Linear(TIME_DIM, TIME_DIM)

    def forward(self, emb: torch.Tensor) -> torch.Tensor:
        return self.fc2(F.silu(self.fc1(emb)))


class ResBlock(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv2d(HIDDEN, HIDDEN, 3, padding=1)
        self.time_proj = nn.Linear(TIME_DIM, HIDDEN)
        self.conv2 = nn.Conv2d(HIDDEN, HIDDEN, 3, padding=1)

    def forward(self, x: torch.Tensor, e: torch.Tensor) -> torch.Tensor:
        h = self.conv1(x) + self.time_proj(e)[:, :, None, None]
        return x + self.conv2(F.silu(h))


class TinyCondNet(nn.Module):
    def __init__(self, group: int = 3):
        super().__init__()
        self.group = group
        self.stem = nn.Conv2d(2 * group, HIDDEN, 3, padding=1)
        self.time_mlp = TimeMLP()
        self.b1 = ResBlock()
        self.b2 = ResBlock()
        self.b3 = ResBlock()
        self.head = nn.Conv2d(HIDDEN, group, 3, padding=1)

    def forward(self, noisy: torch.Tensor, cond: torch.Tensor, timesteps: torch.Tensor) -> torch.Tensor:
        x = F.silu(self.stem(torch.cat([noisy, cond], dim=1)))
        e = self.time_mlp(time_embedding(timesteps))
        for block in (self.b1, self.b2, self.b3):
            x = block(x, e)
        return self.head(x)


def to_arrays(model: TinyCondNet) -> dict[str, np.ndarray]:
    """state_dict as contiguous float32 numpy arrays, registration order."""
    return {
        name: np.ascontiguousarray(tensor.detach().cpu().numpy().astype(np.float32))
        for name, tensor in model.state_dict().items()
    }


def from_arrays(model: TinyCondNet, arrays: dict[str, np.ndarray]) -> TinyCondNet:
    state = {name: torch.from_numpy(np.ascontiguousarray(arr)) for name, arr in arrays.items()}
    model.load_state_dict(state)  # strict: rejects missing or unexpected layers
    return model


def parameter_count(model: TinyCondNet) -> int:
    return sum(p.numel() for p in model.parameters())
