"""Read-back executor used to verify exported files.

Parses the ONNX bytes this package wrote and re-runs the graph with torch
functional ops, so export bugs (mislaid weights, wrong attributes, broken
topology) surface as numeric mismatches against the reference module
instead of silently corrupt files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

_WIRE_VARINT = 0
_WIRE_64BIT = 1
_WIRE_LEN = 2
_WIRE_32BIT = 5


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    value = 0
    shift = 0
    while True:
        byte = buf[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def _fields(buf: bytes):
    pos = 0
    while pos < len(buf):
        key, pos = _read_varint(buf, pos)
        fno, wire = key >> 3, key & 0x7
        if wire == _WIRE_VARINT:
            value, pos = _read_varint(buf, pos)
        elif wire == _WIRE_LEN:
            size, pos = _read_varint(buf, pos)
            value = buf[pos:pos + size]
            pos += size
        elif wire == _WIRE_32BIT:
            value = buf[pos:pos + 4]
            pos += 4
        elif wire == _WIRE_64BIT:
            value = buf[pos:pos + 8]
            pos += 8
        else:
            raise ValueError(f"unsupported wire type {wire}")
        yield fno, wire, value


@dataclass
class Node:
    op_type: str = ""
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    ints: dict[str, list[int]] = field(default_factory=dict)
    floats: dict[str, float] = field(default_factory=dict)


@dataclass
class Graph:
    nodes: list[Node]
    initializers: dict[str, np.ndarray]
    input_names: list[str]
    output_names: list[str]


def _parse_attr(buf: bytes) -> tuple[str, object]:
    name = ""
    single_int = None
    single_float = None
    ints: list[int] = []
    for fno, wire, value in _fields(buf):
        if fno == 1:
            name = value.decode("utf-8")
        elif fno == 2:
            single_float = struct.unpack("<f", value)[0]
        elif fno == 3:
            single_int = value
        elif fno == 8:
            if wire == _WIRE_LEN:
                pos = 0
                while pos < len(value):
                    v, pos = _read_varint(value, pos)
                    ints.append(v)
            else:
                ints.append(value)
    if single_float is not None:
        return name, single_float
    if single_int is not None:
        return name, [single_int]
    return name, ints


def _parse_node(buf: bytes) -> Node:
    parsed = Node()
    for fno, _, value in _fields(buf):
        if fno == 1:
            parsed.inputs.append(value.decode("utf-8"))
        elif fno == 2:
            parsed.outputs.append(value.decode("utf-8"))
        elif fno == 4:
            parsed.op_type = value.decode("utf-8")
        elif fno == 5:
            name, attr = _parse_attr(value)
            if isinstance(attr, float):
                parsed.floats[name] = attr
            else:
                parsed.ints[name] = attr
    return parsed


def _parse_tensor(buf: bytes) -> tuple[str, np.ndarray]:
    name = ""
    dims: list[int] = []
    raw = b""
    for fno, wire, value in _fields(buf):
        if fno == 1:
            if wire == _WIRE_LEN:
                pos = 0
                while pos < len(value):
                    v, pos = _read_varint(value, pos)
                    dims.append(v)
            else:
                dims.append(value)
        elif fno == 8:
            name = value.decode("utf-8")
        elif fno == 9:
            raw = value
    array = np.frombuffer(raw, dtype="<f4").reshape(dims)
    return name, array


def _io_name(buf: bytes) -> str:
    for fno, _, value in _fields(buf):
        if fno == 1:
            return value.decode("utf-8")
    raise ValueError("value info without a name")


def parse_graph(model_bytes: bytes) -> Graph:
    graph_buf = None
    for fno, _, value in _fields(model_bytes):
        if fno == 7:
            graph_buf = value
    if graph_buf is None:
        raise ValueError("model bytes contain no graph")
    nodes: list[Node] = []
    initializers: dict[str, np.ndarray] = {}
    input_names: list[str] = []
    output_names: list[str] = []
    for fno, _, value in _fields(graph_buf):
        if fno == 1:
            nodes.append(_parse_node(value))
        elif fno == 5:
            name, array = _parse_tensor(value)
            initializers[name] = array
        elif fno == 11:
            input_names.append(_io_name(value))
        elif fno == 12:
            output_names.append(_io_name(value))
    return Graph(nodes=nodes, initializers=initializers,
                 input_names=input_names, output_names=output_names)


def _torch_pads(node: Node) -> tuple[int, int]:
    pads = node.ints.get("pads", [0, 0, 0, 0])
    top, left, bottom, right = pads
    if top != bottom or left != right:
        raise ValueError(f"asymmetric pads unsupported: {pads}")
    return top, left


def _eval_node(node: Node, values: dict[str, torch.Tensor]) -> torch.Tensor:
    op = node.op_type
    x = values[node.inputs[0]]
    if op == "Conv":
        weight = values[node.inputs[1]]
        bias = values[node.inputs[2]] if len(node.inputs) > 2 else None
        return F.conv2d(x, weight, bias,
                        stride=tuple(node.ints.get("strides", [1, 1])),
                        padding=_torch_pads(node))
    if op == "BatchNormalization":
        scale, bias, mean, var = (values[n] for n in node.inputs[1:5])
        return F.batch_norm(x, mean, var, scale, bias, training=False,
                            eps=node.floats.get("epsilon", 1e-5))
    if op == "Relu":
        return F.relu(x)
    if op == "MaxPool":
        return F.max_pool2d(x, tuple(node.ints["kernel_shape"]),
                            stride=tuple(node.ints.get("strides", [1, 1])),
                            padding=_torch_pads(node))
    if op == "AveragePool":
        return F.avg_pool2d(x, tuple(node.ints["kernel_shape"]),
                            stride=tuple(node.ints.get("strides", [1, 1])),
                            padding=_torch_pads(node))
    if op == "Concat":
        return torch.cat([values[n] for n in node.inputs],
                         dim=node.ints["axis"][0])
    raise ValueError(f"unsupported op {op!r}")


def run(model_bytes: bytes, x: np.ndarray) -> np.ndarray:
    """Execute the graph on a (N,3,H,W) batch, returning the sole output."""
    graph = parse_graph(model_bytes)
    values = {name: torch.from_numpy(array.copy())
              for name, array in graph.initializers.items()}
    feeds = [n for n in graph.input_names if n not in graph.initializers]
    if len(feeds) != 1 or len(graph.output_names) != 1:
        raise ValueError("expected a single-input single-output graph")
    values[feeds[0]] = torch.from_numpy(np.asarray(x, dtype=np.float32))
    with torch.no_grad():
        for node in graph.nodes:
            values[node.outputs[0]] = _eval_node(node, values)
    return values[graph.output_names[0]].numpy()
