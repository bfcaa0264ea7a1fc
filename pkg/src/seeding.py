from __future__ import annotations

import hashlib
import random

import numpy as np
import torch


def derive_seed(master_seed: int, *parts: object) -> int:
    payload = ":".join([str(master_seed), *(str(part) for part in parts)])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
