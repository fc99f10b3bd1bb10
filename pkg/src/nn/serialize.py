"""
Model file format (numpy .npz archive, one file per model):

    format        "lstm-rnn"
    version       int64 scalar, currently 1
    kind          str ("characterizer", "cache-model", ...)
    layer_dims    int64 (L, 2): (input_dim, hidden_dim) per layer, bottom first
    head_dims     int64 (K,): classes per head
    p000, p001..  parameters in declared order, little-endian float64:
                  per layer Wx (D, 4H), Wh (H, 4H), b (4H,) with gate blocks
                  input|forget|output|candidate; then per head W (H, K), b (K,)
    a000, a001..  RMSProp accumulators, same order and shapes
"""
from __future__ import annotations
from pathlib import Path

import numpy as np

from src.nn.lstm import Head, LstmLayer, RnnModel

FORMAT = "lstm-rnn"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def save_model(model: RnnModel, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        "format": np.array(FORMAT),
        "version": np.array(VERSION, dtype="<i8"),
        "kind": np.array(model.kind),
        "layer_dims": np.array([[l.input_dim, l.hidden_dim] for l in model.layers], dtype="<i8"),
        "head_dims": np.array([h.num_classes for h in model.heads], dtype="<i8"),
    }
    for i, p in enumerate(model.parameters()):
        arrays[f"p{i:03d}"] = np.asarray(p, dtype="<f8")
    for i, a in enumerate(model.accumulators):
        arrays[f"a{i:03d}"] = np.asarray(a, dtype="<f8")
    with path.open("wb") as f:
        np.savez(f, **arrays)


def load_model(path: Path | str) -> RnnModel:
    try:
        data = np.load(Path(path), allow_pickle=False)
    except (OSError, ValueError) as e:
        raise ModelFormatError(f"{path}: not a model file ({e})") from None
    with data:
        if "format" not in data or str(data["format"]) != FORMAT:
            raise ModelFormatError(f"{path}: missing or unknown format tag")
        version = int(data["version"])
        if version != VERSION:
            raise ModelFormatError(f"{path}: unsupported version {version}")
        kind = str(data["kind"])
        layer_dims = data["layer_dims"].astype(int)
        head_dims = data["head_dims"].astype(int)
        n_params = 3 * len(layer_dims) + 2 * len(head_dims)
        try:
            params = [data[f"p{i:03d}"].astype(np.float64) for i in range(n_params)]
            accs = [data[f"a{i:03d}"].astype(np.float64) for i in range(n_params)]
        except KeyError as e:
            raise ModelFormatError(f"{path}: missing array {e}") from None

    layers = []
    k = 0
    for d, h in layer_dims:
        layers.append(LstmLayer(int(d), int(h), params[k], params[k + 1], params[k + 2]))
        k += 3
    heads = []
    for _ in head_dims:
        heads.append(Head(params[k], params[k + 1]))
        k += 2
    return RnnModel(layers, heads, accumulators=accs, kind=kind)
