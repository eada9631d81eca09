"""
File I/O Utilities Module
Asynchronous reading and writing of the files equibound deals with: JSON
config and reports, two-distance bound caches, vector sets and rendered output.
"""

import json
import logging
from datetime import datetime
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import aiofiles
import numpy as np

from gram_lab import VectorSet
from two_distance import SdpCache

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


async def read_text_async(file_path: PathLike) -> str:
    file_path = Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    async with aiofiles.open(file_path, 'r', encoding='utf-8') as f:
        content = await f.read()
    logger.debug(f"Read {len(content)} characters from {file_path}")
    return content


async def write_text_async(file_path: PathLike, content: str) -> None:
    """Write text, creating parent directories as needed."""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(file_path, 'w', encoding='utf-8', newline='\n') as f:
        await f.write(content)
    logger.debug(f"Wrote {len(content)} characters to {file_path}")


async def load_json_async(file_path: PathLike) -> Any:
    try:
        return json.loads(await read_text_async(file_path))
    except Exception as e:
        logger.error(f"Failed to load JSON {file_path}: {e}")
        raise


async def load_cache_async(file_path: PathLike) -> SdpCache:
    """Read and parse a two-distance bound cache."""
    text = await read_text_async(file_path)
    cache = SdpCache.from_text(text, path=Path(file_path))
    logger.info(f"Loaded {len(cache)} cache entries from {file_path}")
    return cache


async def save_cache_async(cache: SdpCache, file_path: PathLike) -> None:
    await write_text_async(file_path, cache.to_text())
    cache.dirty = False
    logger.info(f"Saved {len(cache)} cache entries to {file_path}")


async def load_vector_set_async(file_path: PathLike, tolerance: float = 1e-9) -> VectorSet:
    text = await read_text_async(file_path)
    vectors = VectorSet.from_text(text, tolerance)
    logger.info(f"Loaded {len(vectors)} vectors in R^{vectors.r} from {file_path}")
    return vectors


def to_json(data: Any, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, exact rationals as strings."""
    return json.dumps(data, indent=indent, default=_json_serializer, ensure_ascii=False, sort_keys=True) + "\n"


def _json_serializer(obj):
    """Serializer for the non-JSON types that show up in reports."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (datetime, Path)):
        return str(obj)
    if hasattr(obj, 'to_dict'):
        return obj.to_dict()
    return str(obj)
