"""Feedforward Cox network trained with the negative log partial likelihood.

The network maps a standardized feature row to a scalar log-risk.  Training
minimizes the Breslow partial likelihood over risk sets formed inside each
minibatch (sorted by time within the batch); an exact full-batch mode is a
batch size >= n.  The loss is invariant to adding a constant to all outputs,
so trained models center their outputs to mean zero over the training set.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn

from .cohort import EncodedCohort, stratified_split
from .errors import ConfigError, NumericError
from .metrics import concordance_index

ACTIVATIONS = ("leaky_relu", "relu", "selu", "identity")
OPTIMIZERS = ("sgd", "adam", "lbfgs")  # lbfgs: exact full-batch fitting only

MAGIC = b"T2DRNET1"
WEIGHTS_FORMAT = "t2drisk-neural-weights"
WEIGHTS_VERSION = 1


@dataclass(frozen=True)
class NetConfig:
    """Hyperparameters; defaults are the tuned optimum for the reduced model.

    SELU together with batch normalization is an unusual pairing (SELU is
    self-normalizing by design) but it is exactly what the tuned optimum
    selected, so the default keeps it.
    """

    topology: tuple[int, ...] = (64, 64, 64)
    activation: str = "selu"
    dropout: float = 0.04809
    weight_decay: float = 0.00101
    batch_norm: bool = True
    optimizer: str = "adam"
    momentum: float = 0.9  # ignored by adam and lbfgs
    learning_rate: float = 0.00169
    batch_size: int = 1024
    epochs: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if any(w < 1 for w in self.topology):
            raise ConfigError(f"layer widths must be >= 1, got {self.topology}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation must be one of {ACTIVATIONS}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}")
        if self.batch_size < 2 or self.epochs < 0:
            raise ConfigError("batch_size must be >= 2 and epochs >= 0")

    def to_dict(self) -> dict:
        return {
            "topology": list(self.topology),
            "activation": self.activation,
            "dropout": self.dropout,
            "weight_decay": self.weight_decay,
            "batch_norm": self.batch_norm,
            "optimizer": self.optimizer,
            "momentum": self.momentum,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "NetConfig":
        return cls(
            topology=tuple(d.get("topology", (64, 64, 64))),
            activation=d.get("activation", "selu"),
            dropout=float(d.get("dropout", 0.04809)),
            weight_decay=float(d.get("weight_decay", 0.00101)),
            batch_norm=bool(d.get("batch_norm", True)),
            optimizer=d.get("optimizer", "adam"),
            momentum=float(d.get("momentum", 0.9)),
            learning_rate=float(d.get("learning_rate", 0.00169)),
            batch_size=int(d.get("batch_size", 1024)),
            epochs=int(d.get("epochs", 50)),
            seed=int(d.get("seed", 0)),
        )


def _activation_module(name: str) -> nn.Module:
    return {
        "leaky_relu": nn.LeakyReLU,
        "relu": nn.ReLU,
        "selu": nn.SELU,
        "identity": nn.Identity,
    }[name]()


def build_network(n_inputs: int, config: NetConfig) -> nn.Sequential:
    """Network as configured; weights fan-in scaled, deterministic in the seed."""
    generator = torch.Generator().manual_seed(config.seed)
    layers: list[nn.Module] = []
    width_in = n_inputs
    for width in config.topology:
        layers.append(nn.Linear(width_in, width, dtype=torch.float64))
        if config.batch_norm:
            layers.append(nn.BatchNorm1d(width, dtype=torch.float64))
        layers.append(_activation_module(config.activation))
        if config.dropout > 0:
            layers.append(nn.Dropout(config.dropout))
        width_in = width
    layers.append(nn.Linear(width_in, 1, dtype=torch.float64))
    net = nn.Sequential(*layers)
    with torch.no_grad():
        for module in net:
            if isinstance(module, nn.Linear):
                fan_in = module.weight.shape[1]
                module.weight.normal_(0.0, 1.0 / math.sqrt(fan_in), generator=generator)
                module.bias.zero_()
    return net


@dataclass
class NeuralCoxModel:
    net: nn.Sequential
    config: NetConfig
    feature_names: tuple[str, ...]
    standardization: dict[str, tuple[float, float]]
    output_offset: float = 0.0
    skipped_batches: int = 0

    def forward(self, x: np.ndarray) -> np.ndarray | float:
        """Evaluation-mode log-risk; deterministic (dropout off, BN inference)."""
        arr = np.asarray(x, dtype=np.float64)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.shape[1] != len(self.feature_names):
            raise ConfigError(
                f"expected {len(self.feature_names)} inputs, got {arr.shape[1]}"
            )
        self.net.eval()
        with torch.no_grad():
            out = self.net(torch.from_numpy(arr)).squeeze(-1).numpy() - self.output_offset
        return float(out[0]) if single else out


def batch_loss(
    scores: torch.Tensor, times: torch.Tensor, events: torch.Tensor
) -> tuple[torch.Tensor, int]:
    """Breslow negative log partial likelihood within one batch.

    Returns (mean loss over events, number of events).  Zero-event batches
    return (0, 0) and should be skipped by the caller.
    """
    n_events = int(events.sum().item())
    if n_events == 0:
        return scores.sum() * 0.0, 0
    order = torch.argsort(times, descending=True, stable=True)
    s, t, e = scores[order], times[order], events[order]
    log_cum = torch.logcumsumexp(s, dim=0)
    # rows tied in time share the risk set ending at the last row of the tie block
    t_np = t.detach().numpy()
    block_last = np.searchsorted(-t_np, -t_np, side="right") - 1
    log_s0 = log_cum[torch.from_numpy(block_last)]
    loss = -(s[e] - log_s0[e]).sum() / n_events
    return loss, n_events


def train(
    cohort: EncodedCohort, config: NetConfig
) -> tuple[NeuralCoxModel, list[float]]:
    """Train on an encoded (standardized) cohort; returns model and loss trace.

    The trace holds one mean in-batch loss per epoch.  Batches without events
    (and size-1 batches under batch norm) are skipped and counted; training
    that never processes a batch is an error.
    """
    torch.manual_seed(config.seed)
    net = build_network(cohort.p, config)
    X = torch.from_numpy(np.ascontiguousarray(cohort.matrix, dtype=np.float64))
    times = torch.from_numpy(cohort.times.astype(np.float64))
    events = torch.from_numpy(cohort.events.astype(bool))
    rng = np.random.default_rng(config.seed)

    if config.optimizer == "lbfgs":
        return _train_lbfgs(net, cohort, config, X, times, events)

    if config.optimizer == "adam":
        optimizer = torch.optim.Adam(
            net.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
        )
    else:
        optimizer = torch.optim.SGD(
            net.parameters(),
            lr=config.learning_rate,
            momentum=config.momentum,
            weight_decay=config.weight_decay,
        )

    trace: list[float] = []
    skipped = 0
    processed = 0
    net.train()
    for _ in range(config.epochs):
        perm = rng.permutation(cohort.n)
        epoch_losses = []
        for start in range(0, cohort.n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            if config.batch_norm and idx.shape[0] < 2:
                skipped += 1
                continue
            batch_idx = torch.from_numpy(idx)
            scores = net(X[batch_idx]).squeeze(-1)
            loss, n_events = batch_loss(scores, times[batch_idx], events[batch_idx])
            if n_events == 0:
                skipped += 1
                continue
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            processed += 1
            epoch_losses.append(float(loss.item()))
        if epoch_losses:
            trace.append(float(np.mean(epoch_losses)))
    if config.epochs > 0 and processed == 0:
        raise NumericError("every batch was skipped (no events); cannot train")

    model = NeuralCoxModel(
        net=net,
        config=config,
        feature_names=cohort.feature_names,
        standardization=dict(cohort.standardization),
        skipped_batches=skipped,
    )
    _center_outputs(model, cohort)
    return model, trace


def _train_lbfgs(net, cohort, config, X, times, events):
    if config.batch_size < cohort.n:
        raise ConfigError("lbfgs optimizer requires full-batch training (batch_size >= n)")
    if not cohort.events.any():
        raise NumericError("every batch was skipped (no events); cannot train")
    optimizer = torch.optim.LBFGS(
        net.parameters(),
        lr=config.learning_rate or 1.0,
        max_iter=max(config.epochs, 1) * 10,
        history_size=20,
        tolerance_grad=1e-12,
        tolerance_change=1e-14,
        line_search_fn="strong_wolfe",
    )
    trace: list[float] = []
    net.train()

    def closure():
        optimizer.zero_grad()
        scores = net(X).squeeze(-1)
        loss, _ = batch_loss(scores, times, events)
        if config.weight_decay:
            penalty = sum((p * p).sum() for p in net.parameters())
            loss = loss + 0.5 * config.weight_decay * penalty
        loss.backward()
        trace.append(float(loss.item()))
        return loss

    optimizer.step(closure)
    model = NeuralCoxModel(
        net=net,
        config=config,
        feature_names=cohort.feature_names,
        standardization=dict(cohort.standardization),
    )
    _center_outputs(model, cohort)
    return model, trace


def _center_outputs(model: NeuralCoxModel, cohort: EncodedCohort) -> None:
    model.output_offset = 0.0
    model.output_offset = float(np.mean(model.forward(cohort.matrix)))


# --- hyperparameter search -------------------------------------------------------


@dataclass(frozen=True)
class SearchSpace:
    """Random-search space; defaults mirror the tuned-search grid."""

    topologies: tuple[tuple[int, ...], ...] = (
        (8,), (32,), (256,), (32, 32), (64, 64), (128, 128), (64, 16),
        (256, 32), (32, 32, 32), (64, 64, 64),
    )
    activations: tuple[str, ...] = ("leaky_relu", "relu", "selu")
    dropout: tuple[float, float] = (0.0, 0.9)
    weight_decay: tuple[float, float] = (0.0, 20.0)
    batch_norm: tuple[bool, ...] = (True, False)
    optimizers: tuple[str, ...] = ("sgd", "adam")
    momentum: tuple[float, float] = (0.0, 1.0)
    learning_rate: tuple[float, float] = (1e-5, 1.0)  # log-uniform
    batch_size: int = 1024
    epochs: int = 50
    val_fraction: float = 0.25


def _sample_config(space: SearchSpace, rng: np.random.Generator, seed: int) -> NetConfig:
    def uniform(lo_hi):
        lo, hi = lo_hi
        return lo if lo == hi else float(rng.uniform(lo, hi))

    lr_lo, lr_hi = space.learning_rate
    lr = lr_lo if lr_lo == lr_hi else float(
        np.exp(rng.uniform(np.log(lr_lo), np.log(lr_hi)))
    )
    return NetConfig(
        topology=space.topologies[rng.integers(len(space.topologies))],
        activation=space.activations[rng.integers(len(space.activations))],
        dropout=uniform(space.dropout),
        weight_decay=uniform(space.weight_decay),
        batch_norm=bool(space.batch_norm[rng.integers(len(space.batch_norm))]),
        optimizer=space.optimizers[rng.integers(len(space.optimizers))],
        momentum=uniform(space.momentum),
        learning_rate=lr,
        batch_size=space.batch_size,
        epochs=space.epochs,
        seed=seed,
    )


def hyperparameter_search(
    cohort: EncodedCohort,
    space: SearchSpace,
    trials: int,
    seed: int,
) -> tuple[NetConfig, list[dict]]:
    """Random search over the space, scored by held-out-validation c-index.

    Every trial's config and score lands in the returned ledger; failed
    trials record the error and never win.  Adaptive samplers can sit behind
    this same interface, but random search is the supported baseline.
    """
    if trials < 1:
        raise ConfigError(f"need at least 1 trial, got {trials}")
    rng = np.random.default_rng(seed)
    train_part, val_part = stratified_split(cohort, space.val_fraction, seed)
    ledger: list[dict] = []
    best: tuple[float, NetConfig] | None = None
    for trial in range(trials):
        config = _sample_config(space, rng, seed=seed + 1 + trial)
        entry: dict = {"trial": trial, "config": config.to_dict()}
        try:
            model, _ = train(train_part, config)
            scores = model.forward(val_part.matrix)
            c = concordance_index(val_part.times, val_part.events, scores)
            entry["val_c_index"] = float(c)
            if best is None or c > best[0]:
                best = (c, config)
        except (NumericError, ConfigError) as exc:
            entry["val_c_index"] = None
            entry["error"] = str(exc)
        ledger.append(entry)
    if best is None:
        raise NumericError("all hyperparameter trials failed")
    return best[1], ledger


def tuned_config(seed: int = 0) -> NetConfig:
    """The shipped optimum for the reduced feature set (search not re-run)."""
    return NetConfig(seed=seed)


def save_trial_ledger(entries: Sequence[Mapping], path: str) -> None:
    """Persist search trials as line-delimited JSON records."""
    with open(path, "w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def load_trial_ledger(path: str) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --- weights container -------------------------------------------------------------


def save_weights(model: NeuralCoxModel, path: str) -> None:
    """Write the documented binary container (see docs/weights-format.md)."""
    state = model.net.state_dict()
    arrays = []
    buffers = []
    for name, tensor in state.items():
        arr = tensor.detach().numpy()
        dtype = "<i8" if arr.dtype.kind in "iu" else "<f8"
        arr = arr.astype(dtype)
        arrays.append({"name": name, "shape": list(arr.shape), "dtype": dtype})
        buffers.append(arr.tobytes(order="C"))
    header = {
        "format": WEIGHTS_FORMAT,
        "version": WEIGHTS_VERSION,
        "byte_order": "little",
        "config": model.config.to_dict(),
        "feature_names": list(model.feature_names),
        "standardization": {k: list(v) for k, v in model.standardization.items()},
        "output_offset": model.output_offset,
        "skipped_batches": model.skipped_batches,
        "arrays": arrays,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for buf in buffers:
            fh.write(buf)


def load_weights(path: str) -> NeuralCoxModel:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ConfigError(f"{path}: not a weights container")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        if header.get("format") != WEIGHTS_FORMAT or header.get("version") != WEIGHTS_VERSION:
            raise ConfigError(f"{path}: unsupported weights format/version")
        config = NetConfig.from_dict(header["config"])
        net = build_network(len(header["feature_names"]), config)
        state = {}
        for spec in header["arrays"]:
            count = int(np.prod(spec["shape"])) if spec["shape"] else 1
            raw = fh.read(count * 8)
            arr = np.frombuffer(raw, dtype=spec["dtype"]).reshape(spec["shape"]).copy()
            state[spec["name"]] = torch.from_numpy(arr)
        net.load_state_dict(state)
    return NeuralCoxModel(
        net=net,
        config=config,
        feature_names=tuple(header["feature_names"]),
        standardization={k: tuple(v) for k, v in header["standardization"].items()},
        output_offset=float(header["output_offset"]),
        skipped_batches=int(header.get("skipped_batches", 0)),
    )
