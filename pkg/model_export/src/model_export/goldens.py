"""Golden input/output pair emission for cross-implementation parity tests.

Each pair is a length-1 float32 batch: an input of shape (1,3,128,128) and
the reference trunk's response of shape (1,1920,4,4), stored as .npy files
next to an index.json carrying per-file SHA-256 checksums. Inputs are n
seeded uniform-random images plus one all-zeros image, so consumers cover
both dense activations and the bias/batch-norm-only signal path.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import torch

from model_export.reference import INPUT_SIZE, FeatureTrunk

INDEX_NAME = "index.json"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_goldens(trunk: FeatureTrunk, out_dir: str | Path, n: int = 10,
                 seed: int = 7) -> dict:
    """Write n+1 golden pairs and the index; returns the index dict.

    Deterministic: the same trunk, n, and seed reproduce bit-identical
    files. Raises ValueError for n < 0.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    batches = [(f"random_{i:02d}",
                rng.random((1, 3, INPUT_SIZE, INPUT_SIZE), dtype=np.float32))
               for i in range(n)]
    batches.append(("zeros",
                    np.zeros((1, 3, INPUT_SIZE, INPUT_SIZE), dtype=np.float32)))

    pairs = {}
    for name, x in batches:
        with torch.no_grad():
            y = trunk(torch.from_numpy(x)).numpy().astype(np.float32)
        input_file = f"{name}_input.npy"
        output_file = f"{name}_output.npy"
        np.save(out / input_file, x)
        np.save(out / output_file, y)
        pairs[name] = {
            "input": input_file,
            "output": output_file,
            "input_sha256": _sha256(out / input_file),
            "output_sha256": _sha256(out / output_file),
        }

    index = {"seed": seed, "count": len(pairs), "pairs": pairs}
    (out / INDEX_NAME).write_text(json.dumps(index, indent=2) + "\n",
                                  encoding="utf-8")
    return index
