"""LSTM cells, stacked LSTMs, and the bidirectional-LSTM composition function.

Recurrent state is carried as one [h; c] tensor per layer; the public
lstm_step keeps the conventional (h, c) pair interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Tensor

INIT_SCALE = 0.1
FORGET_BIAS = 1.0


class CompositionError(ValueError):
    """Raised when a reduce-style composition gets no children."""


def uniform_tensor(rng: np.random.Generator, shape, scale=INIT_SCALE, name=None) -> Tensor:
    return Tensor(rng.uniform(-scale, scale, size=shape), name=name)


@dataclass
class LstmCellParams:
    """One LSTM cell: per-gate weights over [x; h_prev] plus biases.

    Each gate maps (input_dim + hidden_dim) -> hidden_dim. The forget-gate
    bias is initialized to +1 to stabilize early training.
    """

    input_dim: int
    hidden_dim: int
    w_input: Tensor
    w_forget: Tensor
    w_output: Tensor
    w_candidate: Tensor
    b_input: Tensor
    b_forget: Tensor
    b_output: Tensor
    b_candidate: Tensor

    @classmethod
    def create(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "LstmCellParams":
        z = input_dim + hidden_dim
        weights = [uniform_tensor(rng, (hidden_dim, z)) for _ in range(4)]
        biases = [Tensor(np.zeros(hidden_dim)) for _ in range(4)]
        biases[1].values[:] = FORGET_BIAS
        return cls(input_dim, hidden_dim, *weights, *biases)

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "LstmCellParams":
        z = input_dim + hidden_dim
        weights = [Tensor(np.zeros((hidden_dim, z))) for _ in range(4)]
        biases = [Tensor(np.zeros(hidden_dim)) for _ in range(4)]
        return cls(input_dim, hidden_dim, *weights, *biases)

    def parameters(self, prefix: str):
        return [
            (f"{prefix}.w_input", self.w_input),
            (f"{prefix}.w_forget", self.w_forget),
            (f"{prefix}.w_output", self.w_output),
            (f"{prefix}.w_candidate", self.w_candidate),
            (f"{prefix}.b_input", self.b_input),
            (f"{prefix}.b_forget", self.b_forget),
            (f"{prefix}.b_output", self.b_output),
            (f"{prefix}.b_candidate", self.b_candidate),
        ]

    def initial_hc(self) -> Tensor:
        return Tensor(np.zeros(2 * self.hidden_dim))

    def step_hc(self, x: Tensor, hc_prev: Tensor) -> Tensor:
        if x.values.shape != (self.input_dim,):
            raise ag.ShapeError(
                f"lstm step: input x has shape {x.values.shape}, expected ({self.input_dim},)"
            )
        return ag.lstm_cell_fused(
            self.w_input, self.w_forget, self.w_output, self.w_candidate,
            self.b_input, self.b_forget, self.b_output, self.b_candidate,
            x, hc_prev,
        )


def lstm_step(params: LstmCellParams, x: Tensor, h_prev: Tensor, c_prev: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM step over explicit (h, c) state; standard gate equations."""
    if h_prev.values.shape != (params.hidden_dim,):
        raise ag.ShapeError(
            f"lstm_step: h_prev has shape {h_prev.values.shape}, expected ({params.hidden_dim},)"
        )
    if c_prev.values.shape != (params.hidden_dim,):
        raise ag.ShapeError(
            f"lstm_step: c_prev has shape {c_prev.values.shape}, expected ({params.hidden_dim},)"
        )
    hc = params.step_hc(x, ag.concat([h_prev, c_prev]))
    hidden = params.hidden_dim
    return ag.slice_vec(hc, 0, hidden), ag.slice_vec(hc, hidden, 2 * hidden)


StackState = tuple[Tensor, ...]  # one [h; c] tensor per layer


@dataclass
class LstmStack:
    """Stacked LSTM layers with inter-layer dropout in training mode."""

    cells: list[LstmCellParams]
    dropout_rate: float = 0.0

    @classmethod
    def create(cls, input_dim, hidden_dim, num_layers, rng, dropout_rate=0.0) -> "LstmStack":
        cells = []
        for layer in range(num_layers):
            d_in = input_dim if layer == 0 else hidden_dim
            cells.append(LstmCellParams.create(d_in, hidden_dim, rng))
        return cls(cells, dropout_rate)

    @property
    def hidden_dim(self):
        return self.cells[0].hidden_dim

    def parameters(self, prefix: str):
        out = []
        for layer, cell in enumerate(self.cells):
            out.extend(cell.parameters(f"{prefix}.layer{layer}"))
        return out

    def initial_state(self) -> StackState:
        return tuple(cell.initial_hc() for cell in self.cells)

    def step(self, x: Tensor, state: StackState, rng=None, training=False) -> StackState:
        new_state = []
        inp = x
        for layer, cell in enumerate(self.cells):
            if layer > 0:
                inp = ag.dropout(inp, self.dropout_rate, rng, training)
            hc = cell.step_hc(inp, state[layer])
            new_state.append(hc)
            inp = ag.slice_vec(hc, 0, cell.hidden_dim)
        return tuple(new_state)

    def top_h(self, state: StackState) -> Tensor:
        return ag.slice_vec(state[-1], 0, self.hidden_dim)


@dataclass
class BiLstmComposer:
    """Composes a labeled constituent into one vector.

    Runs forward and backward LSTM passes over [label, child_1 .. child_n]
    and [label, child_n .. child_1], then combines the two final hidden
    states through an affine map and tanh.
    """

    dim: int
    fwd: LstmCellParams
    bwd: LstmCellParams
    w_combine: Tensor
    b_combine: Tensor

    @classmethod
    def create(cls, dim: int, rng: np.random.Generator) -> "BiLstmComposer":
        return cls(
            dim,
            LstmCellParams.create(dim, dim, rng),
            LstmCellParams.create(dim, dim, rng),
            uniform_tensor(rng, (dim, 2 * dim)),
            Tensor(np.zeros(dim)),
        )

    @classmethod
    def zeros(cls, dim: int) -> "BiLstmComposer":
        return cls(
            dim,
            LstmCellParams.zeros(dim, dim),
            LstmCellParams.zeros(dim, dim),
            Tensor(np.zeros((dim, 2 * dim))),
            Tensor(np.zeros(dim)),
        )

    def parameters(self, prefix: str):
        out = self.fwd.parameters(f"{prefix}.fwd")
        out += self.bwd.parameters(f"{prefix}.bwd")
        out.append((f"{prefix}.w_combine", self.w_combine))
        out.append((f"{prefix}.b_combine", self.b_combine))
        return out

    def compose(self, children: list[Tensor], label_embedding: Tensor) -> Tensor:
        if not children:
            raise CompositionError("compose: cannot reduce a constituent with no children")
        hc_f = self.fwd.initial_hc()
        for t in [label_embedding] + list(children):
            hc_f = self.fwd.step_hc(t, hc_f)
        hc_b = self.bwd.initial_hc()
        for t in [label_embedding] + list(reversed(children)):
            hc_b = self.bwd.step_hc(t, hc_b)
        h_f = ag.slice_vec(hc_f, 0, self.dim)
        h_b = ag.slice_vec(hc_b, 0, self.dim)
        return ag.tanh(ag.affine(self.w_combine, ag.concat([h_f, h_b]), self.b_combine))


def bilstm_compose(composer: BiLstmComposer, children: list[Tensor], label_embedding: Tensor) -> Tensor:
    return composer.compose(children, label_embedding)
