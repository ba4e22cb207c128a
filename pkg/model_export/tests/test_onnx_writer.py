"""Wire-format writer checked against the independent read-back parser."""

import numpy as np
import pytest

from model_export import onnx_writer as ow
from model_export import runtime


class TestVarint:
    @pytest.mark.parametrize("value,encoded", [
        (0, b"\x00"),
        (1, b"\x01"),
        (127, b"\x7f"),
        (128, b"\x80\x01"),
        (300, b"\xac\x02"),
        (1 << 32, b"\x80\x80\x80\x80\x10"),
    ])
    def test_known_encodings(self, value, encoded):
        assert ow._varint(value) == encoded

    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            ow._varint(-1)

    def test_round_trip(self):
        for value in (0, 5, 127, 128, 16384, 2**40 + 3):
            decoded, pos = runtime._read_varint(ow._varint(value), 0)
            assert decoded == value
            assert pos == len(ow._varint(value))


class TestAttributes:
    def test_int_attribute_round_trip(self):
        name, value = runtime._parse_attr(ow.attr_int("group", 1))
        assert name == "group"
        assert value == [1]

    def test_ints_attribute_round_trip(self):
        name, value = runtime._parse_attr(ow.attr_ints("pads", [3, 3, 3, 3]))
        assert name == "pads"
        assert value == [3, 3, 3, 3]

    def test_empty_ints_round_trip(self):
        name, value = runtime._parse_attr(ow.attr_ints("pads", []))
        assert name == "pads"
        assert value == []

    def test_float_attribute_round_trip(self):
        name, value = runtime._parse_attr(ow.attr_float("epsilon", 1e-5))
        assert name == "epsilon"
        assert value == pytest.approx(1e-5)


class TestTensor:
    def test_round_trip_preserves_shape_and_values(self):
        array = np.arange(24, dtype=np.float32).reshape(2, 3, 4) / 7.0
        name, parsed = runtime._parse_tensor(ow.tensor("w", array))
        assert name == "w"
        assert parsed.shape == (2, 3, 4)
        assert np.array_equal(parsed, array)

    def test_float64_input_is_stored_as_float32(self):
        array = np.array([1.0, 2.0], dtype=np.float64)
        _, parsed = runtime._parse_tensor(ow.tensor("w", array))
        assert parsed.dtype == np.float32


class TestValueInfo:
    def test_symbolic_and_fixed_dims(self):
        encoded = ow.value_info("input", ["N", 3, 128, 128])
        dims = []
        for fno, _, value in runtime._fields(encoded):
            if fno != 2:
                continue
            for tno, _, tval in runtime._fields(value):
                if tno != 1:
                    continue
                for eno, _, eval_ in runtime._fields(tval):
                    if eno != 2:
                        continue
                    for sno, _, sval in runtime._fields(eval_):
                        for dno, _, dval in runtime._fields(sval):
                            if dno == 1:
                                dims.append(dval)
                            elif dno == 2:
                                dims.append(dval.decode())
        assert dims == ["N", 3, 128, 128]
        assert runtime._io_name(encoded) == "input"


class TestModelAssembly:
    def test_graph_parses_back_with_topology_intact(self):
        weight = np.ones((4, 3, 1, 1), dtype=np.float32)
        nodes = [ow.node("Conv", ["input", "w"], ["hidden"], name="c",
                         attributes=[ow.attr_ints("strides", [1, 1]),
                                     ow.attr_ints("pads", [0, 0, 0, 0])]),
                 ow.node("Relu", ["hidden"], ["out"], name="r")]
        graph = ow.graph(nodes,
                         inputs=[ow.value_info("input", ["N", 3, 2, 2])],
                         outputs=[ow.value_info("out", ["N", 4, 2, 2])],
                         initializers=[ow.tensor("w", weight)])
        parsed = runtime.parse_graph(ow.model(graph))
        assert [n.op_type for n in parsed.nodes] == ["Conv", "Relu"]
        assert parsed.input_names == ["input"]
        assert parsed.output_names == ["out"]
        assert np.array_equal(parsed.initializers["w"], weight)

    def test_model_executes(self):
        weight = np.full((4, 3, 1, 1), -1.0, dtype=np.float32)
        nodes = [ow.node("Conv", ["input", "w"], ["hidden"],
                         attributes=[ow.attr_ints("strides", [1, 1]),
                                     ow.attr_ints("pads", [0, 0, 0, 0])]),
                 ow.node("Relu", ["hidden"], ["out"])]
        graph = ow.graph(nodes,
                         inputs=[ow.value_info("input", ["N", 3, 2, 2])],
                         outputs=[ow.value_info("out", ["N", 4, 2, 2])],
                         initializers=[ow.tensor("w", weight)])
        out = runtime.run(ow.model(graph), np.ones((1, 3, 2, 2), np.float32))
        # conv sums three -1 channels to -3, relu clamps to zero
        assert out.shape == (1, 4, 2, 2)
        assert np.all(out == 0.0)
