"""DenseNet201 feature-trunk ONNX exporter and golden-vector emitter."""

from model_export.export import ExportError, export_model, verify_export
from model_export.goldens import emit_goldens
from model_export.reference import build_reference

__all__ = ["ExportError", "build_reference", "emit_goldens", "export_model",
           "verify_export"]
