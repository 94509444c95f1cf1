"""Dense float64 tensors with reverse-mode automatic differentiation.

All values are numpy float64 arrays. Gradients are recorded on an explicit
tape: every differentiable operation appends one node, and the backward pass
walks the tape in exact reverse order of the forward execution.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


class ShapeError(ValueError):
    """Operand shapes are inconsistent; message names the offending operand."""


class Tensor:
    """Dense float64 array, optionally tracked on the active gradient tape."""

    __slots__ = ("values", "grad", "tape_id", "name")

    def __init__(self, values, name=None):
        arr = np.asarray(values, dtype=np.float64)
        self.values = arr
        self.grad = None
        self.tape_id = None
        self.name = name

    @property
    def shape(self):
        return self.values.shape

    @property
    def size(self):
        return self.values.size

    def item(self):
        return float(self.values)

    def ensure_grad(self):
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        return self.grad

    def zero_grad(self):
        if self.grad is not None:
            self.grad.fill(0.0)

    def copy_values(self):
        return self.values.copy()

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.values.shape})"


# ---------------------------------------------------------------------------
# tape

_TAPE_STACK: list["GradTape"] = []


class GradTape:
    """Ordered record of forward operations; backward replays it in reverse."""

    def __init__(self):
        self.parents: list[tuple[Tensor, ...]] = []
        self.backwards: list = []
        self.outputs: list[Tensor] = []

    def __enter__(self):
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc):
        popped = _TAPE_STACK.pop()
        assert popped is self
        return False

    def __len__(self):
        return len(self.backwards)

    def record(self, out: Tensor, parents: tuple[Tensor, ...], backward):
        out.tape_id = len(self.backwards)
        self.parents.append(parents)
        self.backwards.append(backward)
        self.outputs.append(out)

    def backward(self, loss: Tensor):
        """Seed d(loss)/d(loss) = 1 and accumulate grads into every parent."""
        if loss.values.ndim != 0:
            raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
        loss.ensure_grad()
        loss.grad += 1.0
        for idx in range(len(self.backwards) - 1, -1, -1):
            out = self.outputs[idx]
            if out.grad is None:
                continue
            parent_grads = self.backwards[idx](out.grad)
            for parent, pgrad in zip(self.parents[idx], parent_grads):
                if pgrad is not None:
                    if parent.grad is None:
                        # copy: backward closures may return shared arrays
                        parent.grad = np.array(pgrad)
                    else:
                        parent.grad += pgrad


def active_tape():
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _emit(values, parents, backward):
    out = Tensor(values)
    tape = active_tape()
    if tape is not None:
        tape.record(out, parents, backward)
    return out


# ---------------------------------------------------------------------------
# primitive operations


def _check_same_shape(op, a, b):
    if a.values.shape != b.values.shape:
        raise ShapeError(
            f"{op}: left operand has shape {a.values.shape}, "
            f"right operand has shape {b.values.shape}"
        )


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("add", a, b)
    return _emit(a.values + b.values, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("sub", a, b)
    return _emit(a.values - b.values, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("mul", a, b)
    va, vb = a.values, b.values
    return _emit(va * vb, (a, b), lambda g: (g * vb, g * va))


def scale(a: Tensor, k: float) -> Tensor:
    return _emit(a.values * k, (a,), lambda g: (g * k,))


def neg(a: Tensor) -> Tensor:
    return _emit(-a.values, (a,), lambda g: (-g,))


def matvec(w: Tensor, x: Tensor) -> Tensor:
    if w.values.ndim != 2:
        raise ShapeError(f"matvec: weight must be 2-d, got shape {w.values.shape}")
    if x.values.ndim != 1 or w.values.shape[1] != x.values.shape[0]:
        raise ShapeError(
            f"matvec: weight has shape {w.values.shape} but input vector "
            f"has shape {x.values.shape}"
        )
    vw, vx = w.values, x.values
    return _emit(vw @ vx, (w, x), lambda g: (np.outer(g, vx), vw.T @ g))


def tanh(a: Tensor) -> Tensor:
    out_v = np.tanh(a.values)
    return _emit(out_v, (a,), lambda g: (g * (1.0 - out_v * out_v),))


def sigmoid(a: Tensor) -> Tensor:
    out_v = expit(a.values)
    return _emit(out_v, (a,), lambda g: (g * out_v * (1.0 - out_v),))


def concat(parts: list[Tensor]) -> Tensor:
    for p in parts:
        if p.values.ndim != 1:
            raise ShapeError(f"concat: all parts must be 1-d, got shape {p.values.shape}")
    sizes = [p.values.shape[0] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits))

    return _emit(np.concatenate([p.values for p in parts]), tuple(parts), backward)


def sum_all(a: Tensor) -> Tensor:
    va = a.values
    return _emit(np.sum(va), (a,), lambda g: (np.full_like(va, float(g)),))


def pick_row(m: Tensor, row: int) -> Tensor:
    """Row lookup with gradient scattered back into the row (embeddings)."""
    if m.values.ndim != 2:
        raise ShapeError(f"pick_row: matrix must be 2-d, got shape {m.values.shape}")
    if not 0 <= row < m.values.shape[0]:
        raise IndexError(f"pick_row: row {row} out of range for shape {m.values.shape}")

    def backward(g):
        full = np.zeros_like(m.values)
        full[row] = g
        return (full,)

    return _emit(m.values[row].copy(), (m,), backward)


def log_softmax(a: Tensor) -> Tensor:
    va = a.values
    shifted = va - np.max(va)
    out_v = shifted - np.log(np.sum(np.exp(shifted)))

    def backward(g):
        return (g - np.exp(out_v) * np.sum(g),)

    return _emit(out_v, (a,), backward)


def cross_entropy(logits: Tensor, target: int) -> Tensor:
    """-log softmax(logits)[target], stabilized by max-subtraction."""
    v = logits.values
    if not 0 <= target < v.shape[0]:
        raise IndexError(f"cross_entropy: target {target} out of range for {v.shape[0]} classes")
    shifted = v - np.max(v)
    probs = np.exp(shifted)
    probs /= probs.sum()
    loss = -(shifted[target] - np.log(np.sum(np.exp(shifted))))

    def backward(g):
        grad = probs * float(g)
        grad[target] -= float(g)
        return (grad,)

    return _emit(loss, (logits,), backward)


def masked_cross_entropy(logits: Tensor, target: int, legal: np.ndarray) -> Tensor:
    """Cross entropy of the softmax renormalized over the legal index set.

    `legal` is a boolean mask; illegal entries get zero probability and zero
    gradient. The target must be legal.
    """
    v = logits.values
    if legal.shape != v.shape:
        raise ShapeError(f"masked_cross_entropy: mask shape {legal.shape} != logits shape {v.shape}")
    if not legal[target]:
        raise ValueError(f"masked_cross_entropy: target {target} is masked out")
    legal_vals = v[legal]
    m = np.max(legal_vals)
    probs = np.zeros_like(v)
    probs[legal] = np.exp(v[legal] - m)
    probs /= probs.sum()
    loss = -np.log(probs[target])

    def backward(g):
        grad = probs * float(g)
        grad[target] -= float(g)
        return (grad,)

    return _emit(loss, (logits,), backward)


def dropout(a: Tensor, rate: float, rng: np.random.Generator | None, training: bool) -> Tensor:
    """Inverted dropout: surviving units scaled by 1/(1-rate); identity at rate 0."""
    if not training or rate == 0.0:
        return a
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout: rate must be in [0, 1), got {rate}")
    if rng is None:
        raise ValueError("dropout: training mode requires an rng")
    mask = (rng.random(a.values.shape) >= rate) / (1.0 - rate)
    return _emit(a.values * mask, (a,), lambda g: (g * mask,))


def slice_vec(a: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous 1-d slice; backward scatters into the source positions."""
    if a.values.ndim != 1:
        raise ShapeError(f"slice_vec: input must be 1-d, got shape {a.values.shape}")

    def backward(g):
        full = np.zeros_like(a.values)
        full[start:stop] = g
        return (full,)

    return _emit(a.values[start:stop].copy(), (a,), backward)


def lstm_cell_fused(
    w_i: Tensor, w_f: Tensor, w_o: Tensor, w_g: Tensor,
    b_i: Tensor, b_f: Tensor, b_o: Tensor, b_g: Tensor,
    x: Tensor, hc_prev: Tensor,
) -> Tensor:
    """Whole LSTM cell as one tape node; returns [h; c] stacked.

    Equivalent to the composed gate equations but with an analytic backward,
    which keeps the tape short on the training hot path.
    """
    hidden = b_i.values.shape[0]
    if hc_prev.values.shape != (2 * hidden,):
        raise ShapeError(
            f"lstm_cell_fused: hc_prev has shape {hc_prev.values.shape}, expected ({2 * hidden},)"
        )
    in_dim = x.values.shape[0]
    if w_i.values.shape != (hidden, in_dim + hidden):
        raise ShapeError(
            f"lstm_cell_fused: gate weight has shape {w_i.values.shape}, "
            f"expected ({hidden}, {in_dim + hidden}) for input shape {x.values.shape}"
        )
    h_prev = hc_prev.values[:hidden]
    c_prev = hc_prev.values[hidden:]
    z = np.concatenate([x.values, h_prev])
    i = expit(w_i.values @ z + b_i.values)
    f = expit(w_f.values @ z + b_f.values)
    o = expit(w_o.values @ z + b_o.values)
    g = np.tanh(w_g.values @ z + b_g.values)
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    out_v = np.concatenate([h, c])

    def backward(grad):
        gh = grad[:hidden]
        gc = grad[hidden:] + gh * o * (1.0 - tc * tc)
        d_ai = gc * g * i * (1.0 - i)
        d_af = gc * c_prev * f * (1.0 - f)
        d_ao = gh * tc * o * (1.0 - o)
        d_ag = gc * i * (1.0 - g * g)
        gz = w_i.values.T @ d_ai + w_f.values.T @ d_af + w_o.values.T @ d_ao + w_g.values.T @ d_ag
        ghc_prev = np.concatenate([gz[in_dim:], gc * f])
        return (
            np.outer(d_ai, z),
            np.outer(d_af, z),
            np.outer(d_ao, z),
            np.outer(d_ag, z),
            d_ai,
            d_af,
            d_ao,
            d_ag,
            gz[:in_dim],
            ghc_prev,
        )

    return _emit(out_v, (w_i, w_f, w_o, w_g, b_i, b_f, b_o, b_g, x, hc_prev), backward)


def affine(w: Tensor, x: Tensor, b: Tensor) -> Tensor:
    """w @ x + b in one node; the fusion keeps LSTM steps short on the tape."""
    if w.values.ndim != 2 or x.values.ndim != 1 or w.values.shape[1] != x.values.shape[0]:
        raise ShapeError(
            f"affine: weight shape {w.values.shape} incompatible with input shape {x.values.shape}"
        )
    if b.values.shape != (w.values.shape[0],):
        raise ShapeError(
            f"affine: bias shape {b.values.shape} incompatible with weight shape {w.values.shape}"
        )
    vw, vx = w.values, x.values

    def backward(g):
        return (np.outer(g, vx), vw.T @ g, g)

    return _emit(vw @ vx + b.values, (w, x, b), backward)
