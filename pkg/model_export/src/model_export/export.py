"""Serialize the reference trunk into the ONNX inference contract.

The exported graph reads a float32 batch named "input" of shape
(N,3,128,128) and produces "features" of shape (N,1920,4,4). Emission
walks the torch module tree, so the file always reflects the exact frozen
weights of the reference instance being exported.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from torch import nn

from model_export import onnx_writer as ow
from model_export import runtime
from model_export.reference import (FEATURE_CHANNELS, INPUT_SIZE,
                                    FeatureTrunk, build_reference)

INPUT_NAME = "input"
OUTPUT_NAME = "features"


class ExportError(Exception):
    """Export produced a file that fails its own verification."""


class _GraphBuilder:
    def __init__(self):
        self.nodes: list[bytes] = []
        self.initializers: list[bytes] = []

    def _tensor(self, name: str, value: torch.Tensor) -> str:
        self.initializers.append(
            ow.tensor(name, value.detach().numpy().astype(np.float32)))
        return name

    def conv(self, qual: str, module: nn.Conv2d, src: str) -> str:
        if module.groups != 1:
            raise ExportError(f"{qual}: grouped convolution unsupported")
        if tuple(module.dilation) != (1, 1):
            raise ExportError(f"{qual}: dilation unsupported")
        inputs = [src, self._tensor(f"{qual}.weight", module.weight)]
        if module.bias is not None:
            inputs.append(self._tensor(f"{qual}.bias", module.bias))
        ph, pw = module.padding
        out = f"{qual}_out"
        self.nodes.append(ow.node(
            "Conv", inputs, [out], name=qual,
            attributes=[ow.attr_ints("kernel_shape", list(module.kernel_size)),
                        ow.attr_ints("strides", list(module.stride)),
                        ow.attr_ints("pads", [ph, pw, ph, pw]),
                        ow.attr_ints("dilations", [1, 1]),
                        ow.attr_int("group", 1)]))
        return out

    def batchnorm(self, qual: str, module: nn.BatchNorm2d, src: str) -> str:
        inputs = [src,
                  self._tensor(f"{qual}.weight", module.weight),
                  self._tensor(f"{qual}.bias", module.bias),
                  self._tensor(f"{qual}.running_mean", module.running_mean),
                  self._tensor(f"{qual}.running_var", module.running_var)]
        out = f"{qual}_out"
        self.nodes.append(ow.node(
            "BatchNormalization", inputs, [out], name=qual,
            attributes=[ow.attr_float("epsilon", module.eps)]))
        return out

    def relu(self, qual: str, src: str, out: str | None = None) -> str:
        out = out or f"{qual}_out"
        self.nodes.append(ow.node("Relu", [src], [out], name=qual))
        return out

    def pool(self, qual: str, op: str, kernel, stride, padding, src: str) -> str:
        kh, kw = _pair(kernel)
        sh, sw = _pair(stride if stride is not None else kernel)
        ph, pw = _pair(padding)
        out = f"{qual}_out"
        self.nodes.append(ow.node(
            op, [src], [out], name=qual,
            attributes=[ow.attr_ints("kernel_shape", [kh, kw]),
                        ow.attr_ints("strides", [sh, sw]),
                        ow.attr_ints("pads", [ph, pw, ph, pw])]))
        return out

    def concat(self, qual: str, sources: list[str]) -> str:
        out = f"{qual}_out"
        self.nodes.append(ow.node("Concat", sources, [out], name=qual,
                                  attributes=[ow.attr_int("axis", 1)]))
        return out


def _pair(value) -> tuple[int, int]:
    if isinstance(value, (tuple, list)):
        return int(value[0]), int(value[1])
    return int(value), int(value)


def _is_dense_layer(module: nn.Module) -> bool:
    return all(hasattr(module, attr)
               for attr in ("norm1", "conv1", "norm2", "conv2"))


def _is_dense_block(module: nn.Module) -> bool:
    children = list(module.children())
    return bool(children) and all(_is_dense_layer(c) for c in children)


def _emit_dense_layer(builder: _GraphBuilder, qual: str, layer: nn.Module,
                      sources: list[str]) -> str:
    src = sources[0] if len(sources) == 1 \
        else builder.concat(f"{qual}.cat", sources)
    src = builder.batchnorm(f"{qual}.norm1", layer.norm1, src)
    src = builder.relu(f"{qual}.relu1", src)
    src = builder.conv(f"{qual}.conv1", layer.conv1, src)
    src = builder.batchnorm(f"{qual}.norm2", layer.norm2, src)
    src = builder.relu(f"{qual}.relu2", src)
    return builder.conv(f"{qual}.conv2", layer.conv2, src)


def _emit_dense_block(builder: _GraphBuilder, qual: str, block: nn.Module,
                      src: str) -> str:
    sources = [src]
    for name, layer in block.named_children():
        sources.append(_emit_dense_layer(builder, f"{qual}.{name}", layer,
                                         list(sources)))
    return builder.concat(f"{qual}.cat", sources)


def _emit_module(builder: _GraphBuilder, qual: str, module: nn.Module,
                 src: str) -> str:
    if isinstance(module, nn.Conv2d):
        return builder.conv(qual, module, src)
    if isinstance(module, nn.BatchNorm2d):
        return builder.batchnorm(qual, module, src)
    if isinstance(module, nn.ReLU):
        return builder.relu(qual, src)
    if isinstance(module, nn.MaxPool2d):
        if module.ceil_mode or module.dilation != 1:
            raise ExportError(f"{qual}: ceil_mode/dilation unsupported")
        return builder.pool(qual, "MaxPool", module.kernel_size,
                            module.stride, module.padding, src)
    if isinstance(module, nn.AvgPool2d):
        if module.ceil_mode or _pair(module.padding) != (0, 0):
            raise ExportError(f"{qual}: padded/ceil average pool unsupported")
        return builder.pool(qual, "AveragePool", module.kernel_size,
                            module.stride, module.padding, src)
    if _is_dense_block(module):
        return _emit_dense_block(builder, qual, module, src)
    if isinstance(module, nn.Sequential):
        for name, child in module.named_children():
            src = _emit_module(builder, f"{qual}.{name}", child, src)
        return src
    raise ExportError(f"unsupported module at {qual}: {type(module).__name__}")


def serialize_trunk(trunk: FeatureTrunk) -> bytes:
    """Emit the full model file contents for a reference trunk."""
    builder = _GraphBuilder()
    src = INPUT_NAME
    for name, module in trunk.features.named_children():
        src = _emit_module(builder, f"features.{name}", module, src)
    builder.relu("final_relu", src, out=OUTPUT_NAME)
    graph = ow.graph(
        builder.nodes,
        inputs=[ow.value_info(INPUT_NAME, ["N", 3, INPUT_SIZE, INPUT_SIZE])],
        outputs=[ow.value_info(OUTPUT_NAME, ["N", FEATURE_CHANNELS, 4, 4])],
        initializers=builder.initializers,
        name="densenet201_features")
    return ow.model(graph)


def verify_export(model_bytes: bytes, trunk: FeatureTrunk, n: int = 10,
                  seed: int = 0, tolerance: float = 1e-4) -> float:
    """Compare the written graph against the live reference on random inputs.

    Returns the max-abs difference; raises ExportError beyond tolerance or
    on a wrong output shape.
    """
    rng = np.random.default_rng(seed)
    batch = rng.random((n, 3, INPUT_SIZE, INPUT_SIZE), dtype=np.float32)
    with torch.no_grad():
        want = trunk(torch.from_numpy(batch)).numpy()
    got = runtime.run(model_bytes, batch)
    if got.shape != (n, FEATURE_CHANNELS, 4, 4):
        raise ExportError(f"exported graph produced {got.shape}, expected "
                          f"{(n, FEATURE_CHANNELS, 4, 4)}")
    diff = float(np.max(np.abs(got - want)))
    if diff > tolerance:
        raise ExportError(f"export self-parity failed: max-abs diff {diff:.3g} "
                          f"exceeds {tolerance:.1e}")
    return diff


def export_model(output_path: str | Path, *, weights: str = "random",
                 seed: int = 0, reference: FeatureTrunk | None = None,
                 verify_n: int = 10) -> FeatureTrunk:
    """Write the ONNX file, verify it, and return the reference used.

    The same reference instance should then feed `emit_goldens` so golden
    outputs match the exported weights exactly.
    """
    trunk = reference if reference is not None else build_reference(weights, seed)
    data = serialize_trunk(trunk)
    if verify_n:
        verify_export(data, trunk, n=verify_n)
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return trunk
