"""
Message and Matrix File Module
Reads and writes message-set files and weight-matrix dumps

Message-set file: header line "l c M", then M lines of c space-separated
0-based letters. Text matrix dump: header line "N c l M", then the
cross-block counts, one l x l table per block pair a < b (row-major).
"""
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from src.model import ModelParams, validate_messages
from src.network import WeightMatrix, count_dtype

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileFormatError(ValueError):
    """A message or matrix file does not follow its format"""


def _read_header(path: Path, fields: int) -> Tuple[int, ...]:
    with open(path, 'r', encoding='utf-8') as handle:
        first = handle.readline().split()
    if len(first) != fields:
        raise FileFormatError(f"{path}: header must have {fields} integers (got {first})")
    try:
        return tuple(int(x) for x in first)
    except ValueError:
        raise FileFormatError(f"{path}: header must be integers (got {first})") from None


def write_messages(path: PathLike, msgs, p: ModelParams) -> None:
    """Write a message set with an "l c M" header"""
    letters = validate_messages(msgs, p)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"{p.l} {p.c} {letters.shape[0]}\n")
        np.savetxt(handle, letters, fmt='%d', delimiter=' ', newline='\n')
    logger.info(f"Wrote {letters.shape[0]} messages to {path}")


def read_messages(path: PathLike) -> Tuple[np.ndarray, int, int]:
    """
    Read a message-set file

    Returns:
        (letters, l, c) with letters of shape (M, c)
    """
    path = Path(path)
    l, c, M = _read_header(path, 3)
    if M == 0:
        letters = np.zeros((0, c), dtype=np.int64)
    else:
        letters = np.loadtxt(path, dtype=np.int64, skiprows=1, ndmin=2)
    if letters.shape != (M, c):
        raise FileFormatError(f"{path}: expected {M} rows of {c} letters (got {letters.shape})")
    if np.any((letters < 0) | (letters >= l)):
        raise FileFormatError(f"{path}: letters must lie in [0, {l})")
    return letters, l, c


def export_matrix_text(path: PathLike, w: WeightMatrix) -> None:
    """
    Text dump for small instances and golden tests

    Only the cross-block tables are written: for each block pair a < b in
    row-major order, l rows of l counts W[(a, i), (b, j)].
    """
    blocks = w.blocks()
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"{w.n} {w.c} {w.l} {w.M}\n")
        for a in range(w.c):
            for b in range(a + 1, w.c):
                np.savetxt(handle, blocks[a, :, b, :], fmt='%d', delimiter=' ', newline='\n')


def import_matrix_text(path: PathLike) -> WeightMatrix:
    path = Path(path)
    n, c, l, M = _read_header(path, 4)
    if n != c * l:
        raise FileFormatError(f"{path}: N = {n} is not c * l = {c * l}")
    pairs = [(a, b) for a in range(c) for b in range(a + 1, c)]
    tables = np.loadtxt(path, dtype=np.int64, skiprows=1, ndmin=2)
    if tables.shape != (len(pairs) * l, l):
        raise FileFormatError(
            f"{path}: expected {len(pairs)} cross-block tables of {l} x {l} (got {tables.shape})"
        )

    counts = np.zeros((n, n), dtype=count_dtype(M))
    blocks = counts.reshape(c, l, c, l)
    for k, (a, b) in enumerate(pairs):
        table = tables[k * l:(k + 1) * l]
        blocks[a, :, b, :] = table
        blocks[b, :, a, :] = table.T
    return WeightMatrix(counts=counts, c=c, l=l, M=M)


def export_matrix_binary(path: PathLike, w: WeightMatrix) -> None:
    """Compressed .npz dump carrying the same header fields"""
    np.savez_compressed(path, counts=w.counts, header=np.array([w.n, w.c, w.l, w.M], dtype=np.int64))


def import_matrix_binary(path: PathLike) -> WeightMatrix:
    with np.load(path) as data:
        n, c, l, M = (int(x) for x in data['header'])
        counts = data['counts']
    if counts.shape != (n, n):
        raise FileFormatError(f"{path}: expected a {n} x {n} matrix (got {counts.shape})")
    return WeightMatrix(counts=counts, c=c, l=l, M=M)
