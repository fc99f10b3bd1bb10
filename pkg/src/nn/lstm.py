from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

# Gate blocks along the last axis of Wx / Wh / b: input, forget, output, candidate.
N_GATES = 4
FORGET_BIAS = 1.0

State = List[Tuple[np.ndarray, np.ndarray]]  # (h, c) per layer


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


@dataclass
class LstmLayer:
    input_dim: int
    hidden_dim: int
    Wx: np.ndarray  # (input_dim, 4H)
    Wh: np.ndarray  # (H, 4H)
    b: np.ndarray   # (4H,)

    def __post_init__(self):
        H4 = N_GATES * self.hidden_dim
        if self.Wx.shape != (self.input_dim, H4) or self.Wh.shape != (self.hidden_dim, H4) or self.b.shape != (H4,):
            raise ValueError("LSTM weight shapes inconsistent with (input_dim, hidden_dim)")

    def parameters(self) -> List[np.ndarray]:
        return [self.Wx, self.Wh, self.b]


@dataclass
class Head:
    W: np.ndarray  # (H, K)
    b: np.ndarray  # (K,)

    @property
    def num_classes(self) -> int:
        return self.W.shape[1]

    def parameters(self) -> List[np.ndarray]:
        return [self.W, self.b]


@dataclass
class RnnModel:
    """Stacked LSTM with one or more softmax heads reading the top hidden state."""
    layers: List[LstmLayer]
    heads: List[Head]
    accumulators: List[np.ndarray] = field(default_factory=list)
    kind: str = "rnn"

    def __post_init__(self):
        if not self.layers or not self.heads:
            raise ValueError("model needs at least one layer and one head")
        for lo, hi in zip(self.layers, self.layers[1:]):
            if lo.hidden_dim != hi.input_dim:
                raise ValueError("layer dims do not chain")
        for h in self.heads:
            if h.W.shape[0] != self.hidden_dim or h.b.shape != (h.num_classes,):
                raise ValueError("head shape does not match top hidden_dim")
            if h.num_classes < 2:
                raise ValueError("num_classes must be ≥ 2")
        if not self.accumulators:
            self.accumulators = [np.zeros_like(p) for p in self.parameters()]

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def hidden_dim(self) -> int:
        return self.layers[-1].hidden_dim

    @property
    def num_classes(self) -> int:
        return self.heads[0].num_classes

    def parameters(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.extend(layer.parameters())
        for head in self.heads:
            out.extend(head.parameters())
        return out


def init_model(
    input_dim: int,
    hidden_dim: int,
    num_classes: int | Sequence[int],
    num_layers: int = 1,
    seed: int = 0,
    kind: str = "rnn",
) -> RnnModel:
    """Uniform(±1/sqrt(fan_in)) weights, zero biases except the forget gate (1.0)."""
    rng = np.random.default_rng(seed)
    classes = [num_classes] if isinstance(num_classes, int) else list(num_classes)

    def uni(fan_in: int, shape) -> np.ndarray:
        lim = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-lim, lim, size=shape)

    layers = []
    d = input_dim
    for _ in range(num_layers):
        H4 = N_GATES * hidden_dim
        b = np.zeros(H4)
        b[hidden_dim:2 * hidden_dim] = FORGET_BIAS
        layers.append(LstmLayer(d, hidden_dim, uni(d, (d, H4)), uni(hidden_dim, (hidden_dim, H4)), b))
        d = hidden_dim
    heads = [Head(uni(hidden_dim, (hidden_dim, k)), np.zeros(k)) for k in classes]
    return RnnModel(layers, heads, kind=kind)


# ---------- forward / backward ----------

@dataclass
class _LayerCache:
    X: np.ndarray       # (B, T, D) layer input
    HP: np.ndarray      # (B, T, H) h_{t-1}
    CP: np.ndarray      # (B, T, H) c_{t-1}
    I: np.ndarray
    F: np.ndarray
    O: np.ndarray
    G: np.ndarray
    TC: np.ndarray      # tanh(c_t)


def _layer_forward(layer: LstmLayer, X: np.ndarray, keep: bool = True):
    B, T, _ = X.shape
    H = layer.hidden_dim
    xz = X @ layer.Wx + layer.b
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((B, T, H))
    if keep:
        HP, CP, I, F, O, G, TC = (np.empty((B, T, H)) for _ in range(7))
    for t in range(T):
        z = xz[:, t] + h @ layer.Wh
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        o = _sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        if keep:
            HP[:, t], CP[:, t] = h, c
            I[:, t], F[:, t], O[:, t], G[:, t] = i, f, o, g
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        hs[:, t] = h
        if keep:
            TC[:, t] = tc
    cache = _LayerCache(X, HP, CP, I, F, O, G, TC) if keep else None
    return hs, cache


def _layer_backward(layer: LstmLayer, cache: _LayerCache, dH: np.ndarray):
    B, T, H = dH.shape
    D = layer.input_dim
    DZ = np.empty((B, T, N_GATES * H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        i, f, o, g, tc = cache.I[:, t], cache.F[:, t], cache.O[:, t], cache.G[:, t], cache.TC[:, t]
        dh = dH[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * cache.CP[:, t]
        dc_next = dc * f
        dz = DZ[:, t]
        dz[:, :H] = di * i * (1.0 - i)
        dz[:, H:2 * H] = df * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = do * o * (1.0 - o)
        dz[:, 3 * H:] = dg * (1.0 - g * g)
        dh_next = dz @ layer.Wh.T
    flat = DZ.reshape(B * T, -1)
    dWx = cache.X.reshape(B * T, D).T @ flat
    dWh = cache.HP.reshape(B * T, H).T @ flat
    db = flat.sum(axis=0)
    dX = DZ @ layer.Wx.T
    return [dWx, dWh, db], dX


def _check_input(model: RnnModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] == 0:
        raise ValueError("window must be a non-empty (T, D) or (B, T, D) array")
    if X.shape[2] != model.input_dim:
        raise ValueError(f"dimension mismatch: feature rows have {X.shape[2]} columns, model expects {model.input_dim}")
    return X


def predict_sequence(model: RnnModel, X: np.ndarray) -> List[np.ndarray]:
    """Per-head probabilities at every timestep, each (B, T, K)."""
    inp = _check_input(model, X)
    for layer in model.layers:
        inp, _ = _layer_forward(layer, inp, keep=False)
    return [softmax(inp @ h.W + h.b) for h in model.heads]


def forward(model: RnnModel, window) -> np.ndarray:
    """Class distribution of the first head after the last row of `window`."""
    X = _check_input(model, window)
    if X.shape[0] != 1:
        raise ValueError("forward takes a single window")
    return predict_sequence(model, X)[0][0, -1]


@dataclass
class BatchResult:
    loss: float
    gradients: Optional[List[np.ndarray]]
    correct: List[int]
    total: List[int]


def batch_pass(model: RnnModel, X: np.ndarray, Ys: Sequence[np.ndarray], need_grads: bool = True) -> BatchResult:
    """
    Cross-entropy summed over heads; each head's term is the mean over its supervised
    (sample, timestep) positions. Targets < 0 are unsupervised.
    """
    X = _check_input(model, X)
    if len(Ys) != len(model.heads):
        raise ValueError("one target array per head required")
    caches: List[_LayerCache] = []
    inp = X
    for layer in model.layers:
        inp, cache = _layer_forward(layer, inp, keep=need_grads)
        caches.append(cache)
    top = inp

    loss = 0.0
    dTop = np.zeros_like(top) if need_grads else None
    head_grads: List[np.ndarray] = []
    correct: List[int] = []
    total: List[int] = []
    for head, Y in zip(model.heads, Ys):
        Y = np.asarray(Y)
        if Y.shape != top.shape[:2]:
            raise ValueError("dimension mismatch: targets must be (B, T)")
        if np.any(Y >= head.num_classes):
            raise ValueError("label out of range")
        mask = Y >= 0
        count = int(mask.sum())
        total.append(count)
        if count == 0:
            correct.append(0)
            head_grads.extend([np.zeros_like(head.W), np.zeros_like(head.b)])
            continue
        hsel = top[mask]
        ysel = Y[mask].astype(np.int64)
        logits = hsel @ head.W + head.b
        logp = log_softmax(logits)
        rows = np.arange(count)
        loss += float(-logp[rows, ysel].mean())
        correct.append(int((logits.argmax(axis=1) == ysel).sum()))
        if need_grads:
            dlog = np.exp(logp)
            dlog[rows, ysel] -= 1.0
            dlog /= count
            head_grads.extend([hsel.T @ dlog, dlog.sum(axis=0)])
            dTop[mask] += dlog @ head.W.T

    if not need_grads:
        return BatchResult(loss, None, correct, total)

    layer_grads: List[List[np.ndarray]] = []
    d = dTop
    for layer, cache in zip(reversed(model.layers), reversed(caches)):
        g, d = _layer_backward(layer, cache, d)
        layer_grads.append(g)
    grads: List[np.ndarray] = []
    for g in reversed(layer_grads):
        grads.extend(g)
    grads.extend(head_grads)
    return BatchResult(loss, grads, correct, total)


# ---------- streaming inference ----------

def initial_state(model: RnnModel, batch: int = 1) -> State:
    return [(np.zeros((batch, l.hidden_dim)), np.zeros((batch, l.hidden_dim))) for l in model.layers]


def step(model: RnnModel, x_row: np.ndarray, state: State) -> Tuple[List[np.ndarray], State]:
    """Advance one timestep; returns per-head distributions (one row per batch entry)."""
    inp = np.asarray(x_row, dtype=np.float64).reshape(len(state[0][0]), -1)
    if inp.shape[1] != model.input_dim:
        raise ValueError(f"dimension mismatch: row has {inp.shape[1]} columns, model expects {model.input_dim}")
    new_state: State = []
    for layer, (h, c) in zip(model.layers, state):
        H = layer.hidden_dim
        z = inp @ layer.Wx + h @ layer.Wh + layer.b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        o = _sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        new_state.append((h, c))
        inp = h
    return [softmax(inp @ hd.W + hd.b) for hd in model.heads], new_state
