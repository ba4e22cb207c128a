"""Minimal ONNX protobuf writer.

Emits the subset of the ONNX wire format needed for a frozen inference
graph: Model/Graph/Node/Attribute/Tensor/ValueInfo messages with float32
initializers held as little-endian raw bytes. Field numbers follow
onnx.proto; only proto3 wire types 0 (varint), 2 (length-delimited) and
5 (32-bit) are needed.
"""

from __future__ import annotations

import struct
from collections.abc import Iterable, Sequence

import numpy as np

_WIRE_VARINT = 0
_WIRE_LEN = 2
_WIRE_32BIT = 5

# AttributeProto.AttributeType values
ATTR_FLOAT = 1
ATTR_INT = 2
ATTR_STRING = 3
ATTR_FLOATS = 6
ATTR_INTS = 7

# TensorProto.DataType
DTYPE_FLOAT = 1

IR_VERSION = 8
DEFAULT_OPSET = 13


def _varint(value: int) -> bytes:
    if value < 0:
        raise ValueError(f"negative varint {value}")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _tag(field: int, wire: int) -> bytes:
    return _varint((field << 3) | wire)


def _field_varint(field: int, value: int) -> bytes:
    return _tag(field, _WIRE_VARINT) + _varint(value)


def _field_bytes(field: int, payload: bytes) -> bytes:
    return _tag(field, _WIRE_LEN) + _varint(len(payload)) + payload


def _field_string(field: int, text: str) -> bytes:
    return _field_bytes(field, text.encode("utf-8"))


def _field_float(field: int, value: float) -> bytes:
    return _tag(field, _WIRE_32BIT) + struct.pack("<f", value)


def _packed_varints(field: int, values: Iterable[int]) -> bytes:
    payload = b"".join(_varint(v) for v in values)
    return _field_bytes(field, payload)


def attr_int(name: str, value: int) -> bytes:
    return (_field_string(1, name) + _field_varint(3, value)
            + _field_varint(20, ATTR_INT))


def attr_float(name: str, value: float) -> bytes:
    return (_field_string(1, name) + _field_float(2, value)
            + _field_varint(20, ATTR_FLOAT))


def attr_ints(name: str, values: Sequence[int]) -> bytes:
    return (_field_string(1, name) + _packed_varints(8, values)
            + _field_varint(20, ATTR_INTS))


def node(op_type: str, inputs: Sequence[str], outputs: Sequence[str],
         name: str = "", attributes: Sequence[bytes] = ()) -> bytes:
    parts = [_field_string(1, value) for value in inputs]
    parts += [_field_string(2, value) for value in outputs]
    if name:
        parts.append(_field_string(3, name))
    parts.append(_field_string(4, op_type))
    parts += [_field_bytes(5, attr) for attr in attributes]
    return b"".join(parts)


def tensor(name: str, array: np.ndarray) -> bytes:
    """Float32 initializer with raw little-endian payload."""
    data = np.ascontiguousarray(array, dtype="<f4")
    return (_packed_varints(1, data.shape)
            + _field_varint(2, DTYPE_FLOAT)
            + _field_string(8, name)
            + _field_bytes(9, data.tobytes()))


def value_info(name: str, dims: Sequence[int | str]) -> bytes:
    shape_parts = []
    for dim in dims:
        if isinstance(dim, str):
            entry = _field_string(2, dim)  # symbolic (e.g. batch "N")
        else:
            entry = _field_varint(1, int(dim))
        shape_parts.append(_field_bytes(1, entry))
    tensor_type = (_field_varint(1, DTYPE_FLOAT)
                   + _field_bytes(2, b"".join(shape_parts)))
    type_proto = _field_bytes(1, tensor_type)
    return _field_string(1, name) + _field_bytes(2, type_proto)


def graph(nodes: Sequence[bytes], inputs: Sequence[bytes],
          outputs: Sequence[bytes], initializers: Sequence[bytes],
          name: str = "net") -> bytes:
    parts = [_field_bytes(1, n) for n in nodes]
    parts.append(_field_string(2, name))
    parts += [_field_bytes(5, t) for t in initializers]
    parts += [_field_bytes(11, v) for v in inputs]
    parts += [_field_bytes(12, v) for v in outputs]
    return b"".join(parts)


def model(graph_bytes: bytes, opset_version: int = DEFAULT_OPSET,
          producer: str = "model-export") -> bytes:
    opset = _field_varint(2, opset_version)  # default "" domain omitted
    return (_field_varint(1, IR_VERSION)
            + _field_string(2, producer)
            + _field_bytes(7, graph_bytes)
            + _field_bytes(8, opset))
