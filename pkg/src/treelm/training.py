"""Training loop: per-sentence gradient descent with dev-set early stopping."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .autograd import GradTape
from .optim import GradientError, OptimConfig, Optimizer


@dataclass
class TrainConfig:
    max_epochs: int = 20
    patience: int = 3
    optimizer: str = "sgd"
    lr: float = 0.5
    clip_norm: float | None = 5.0
    lr_decay: float = 0.5
    seed: int = 0
    shuffle: bool = True

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class EpochStats:
    epoch: int
    train_ppl: float
    dev_ppl: float
    lr: float

    def to_json(self) -> str:
        return json.dumps(
            {"epoch": self.epoch, "train_ppl": self.train_ppl, "dev_ppl": self.dev_ppl, "lr": self.lr}
        )


@dataclass
class TrainResult:
    log: list[EpochStats] = field(default_factory=list)
    best_dev_nll: float = math.inf
    best_epoch: int = -1
    diverged: bool = False
    stopped_early: bool = False


def _safe_ppl(nll: float, events: int) -> float:
    per_event = nll / max(events, 1)
    if per_event > 700 or not math.isfinite(per_event):
        return math.inf
    return math.exp(per_event)


def corpus_nll(model, sequences) -> tuple[float, int]:
    total, events = 0.0, 0
    for seq in sequences:
        total += model.sequence_nll(seq)
        events += len(seq)
    return total, events


def train_model(model, train_seqs, dev_seqs, config: TrainConfig, log_fn=None) -> TrainResult:
    """Minimize summed stepwise cross entropy over event sequences.

    Early stopping tracks dev loss with the configured patience; the learning
    rate decays on every non-improving epoch (SGD). The best parameters seen
    are restored before returning. A NaN dev loss aborts with the last good
    parameters retained.
    """
    rng = np.random.default_rng(config.seed)
    opt = Optimizer(
        model.named_parameters(),
        OptimConfig(algorithm=config.optimizer, lr=config.lr, clip_norm=config.clip_norm,
                    lr_decay=config.lr_decay),
    )
    result = TrainResult()
    best_params = snapshot_params(model)
    strikes = 0
    order = list(range(len(train_seqs)))
    for epoch in range(1, config.max_epochs + 1):
        if config.shuffle:
            rng.shuffle(order)
        train_nll, train_events = 0.0, 0
        try:
            for idx in order:
                seq = train_seqs[idx]
                if not seq:
                    continue
                with GradTape() as tape:
                    loss, n = model.sequence_loss(seq, rng=rng, training=True)
                    tape.backward(loss)
                train_nll += loss.item()
                train_events += n
                opt.step()
                opt.zero_grad()
        except GradientError:
            result.diverged = True
            break
        dev_nll, dev_events = corpus_nll(model, dev_seqs)
        stats = EpochStats(
            epoch=epoch,
            train_ppl=_safe_ppl(train_nll, train_events),
            dev_ppl=_safe_ppl(dev_nll, dev_events),
            lr=opt.lr,
        )
        result.log.append(stats)
        if log_fn is not None:
            log_fn(stats)
        if not math.isfinite(dev_nll):
            result.diverged = True
            break
        if dev_nll < result.best_dev_nll:
            result.best_dev_nll = dev_nll
            result.best_epoch = epoch
            best_params = snapshot_params(model)
            strikes = 0
        else:
            strikes += 1
            if config.optimizer == "sgd":
                opt.decay_lr()
            if strikes >= config.patience:
                result.stopped_early = True
                break
    restore_params(model, best_params)
    return result


def snapshot_params(model) -> dict[str, np.ndarray]:
    return {name: t.values.copy() for name, t in model.named_parameters()}


def restore_params(model, snapshot: dict[str, np.ndarray]):
    for name, t in model.named_parameters():
        t.values[...] = snapshot[name]
