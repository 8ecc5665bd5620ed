"""Single-file binary model archive.

Layout (all integers little-endian)::

    magic            8 bytes   b"HYLEMMA\\x00"
    format_version   u32
    section_count    u32
    section table    section_count x (tag 4s, offset u64, length u64, crc32 u32)
    header_crc32     u32       over every byte above
    payloads         section bytes at the recorded offsets

Sections: ``META`` (UTF-8 JSON), ``TREE`` (edit-tree inventory), ``LKUP``
(lookup table), ``SLCT`` (selector labels, feature ids and float32 weights).
Strings are u32 byte length + UTF-8 bytes.
"""
from __future__ import annotations

import json
import struct
import zlib
from typing import BinaryIO

import numpy as np

from .edit_tree import EditTree, MatchNode, ReplaceNode, TreeInventory
from .lookup import LookupEntry, LookupKey, LookupTable
from .rules import RuleConfig
from .selector import SelectorConfig, SelectorModel

MAGIC = b"HYLEMMA\x00"
FORMAT_VERSION = 1

_HEAD = struct.Struct("<8sII")
_ENTRY = struct.Struct("<4sQQI")
_U32 = struct.Struct("<I")
_SECTIONS = (b"META", b"TREE", b"LKUP", b"SLCT")


class ArchiveError(ValueError):
    """The archive cannot be read."""


class BadMagicError(ArchiveError):
    pass


class VersionMismatchError(ArchiveError):
    pass


class TruncatedArchiveError(ArchiveError):
    pass


class ChecksumError(ArchiveError):
    pass


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u32(self, value: int) -> None:
        self.parts.append(_U32.pack(value))

    def str(self, text: str) -> None:
        raw = text.encode("utf-8")
        self.u32(len(raw))
        self.parts.append(raw)

    def raw(self, data: bytes) -> None:
        self.parts.append(data)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes, section: str):
        self.data = data
        self.pos = 0
        self.section = section

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedArchiveError(f"section {self.section} ends unexpectedly")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def str(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def array(self, dtype: str, count: int) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count), dtype=dtype)

    def done(self) -> None:
        if self.pos != len(self.data):
            raise ArchiveError(f"section {self.section} has {len(self.data) - self.pos} trailing bytes")


def _write_tree(w: _Writer, tree: EditTree) -> None:
    if isinstance(tree, ReplaceNode):
        w.raw(b"R")
        w.str(tree.source)
        w.str(tree.target)
    else:
        w.raw(b"M")
        w.u32(tree.prefix_len)
        w.u32(tree.suffix_len)
        _write_tree(w, tree.left)
        _write_tree(w, tree.right)


def _read_tree(r: _Reader) -> EditTree:
    kind = r.take(1)
    if kind == b"R":
        return ReplaceNode(r.str(), r.str())
    if kind == b"M":
        p, s = r.u32(), r.u32()
        left = _read_tree(r)
        return MatchNode(p, s, left, _read_tree(r))
    raise ArchiveError(f"unknown tree node kind {kind!r}")


def _encode_meta(model) -> bytes:
    meta = {
        "format_version": model.format_version,
        "rules": vars(model.rules),
        "selector_config": vars(model.selector.config),
        "training_metadata": model.training_metadata,
    }
    return json.dumps(meta, sort_keys=True, ensure_ascii=False).encode("utf-8")


def _encode_trees(inventory: TreeInventory) -> bytes:
    w = _Writer()
    w.u32(len(inventory))
    for tree, freq in zip(inventory.trees, inventory.freq):
        w.u32(freq)
        _write_tree(w, tree)
    return w.getvalue()


def _encode_lookup(table: LookupTable) -> bytes:
    w = _Writer()
    items = table.sorted_items()
    w.u32(len(items))
    for key, entry in items:
        w.str(key.masked_form)
        w.str(key.upos)
        w.u32(len(key.feats))
        for k, v in key.feats:
            w.str(k)
            w.str(v)
        w.u32(entry.tree_id)
        w.u32(entry.count)
        w.u32(entry.total)
    return w.getvalue()


def _encode_selector(sel: SelectorModel) -> bytes:
    w = _Writer()
    rows, cols = sel.weights.shape
    w.u32(rows)
    w.u32(cols)
    w.u32(sel.config.feature_space_size)
    w.raw(sel.labels.astype("<u4").tobytes())
    w.raw(sel.feature_ids.astype("<u4").tobytes())
    w.raw(sel.weights.astype("<f4").tobytes(order="C"))
    return w.getvalue()


def dump_bytes(model) -> bytes:
    payloads = [
        (b"META", _encode_meta(model)),
        (b"TREE", _encode_trees(model.inventory)),
        (b"LKUP", _encode_lookup(model.lookup)),
        (b"SLCT", _encode_selector(model.selector)),
    ]
    header_len = _HEAD.size + _ENTRY.size * len(payloads) + _U32.size
    header = bytearray(_HEAD.pack(MAGIC, model.format_version, len(payloads)))
    offset = header_len
    for tag, data in payloads:
        header += _ENTRY.pack(tag, offset, len(data), zlib.crc32(data))
        offset += len(data)
    header += _U32.pack(zlib.crc32(header))
    return bytes(header) + b"".join(data for _, data in payloads)


def save_model(model, sink: BinaryIO) -> None:
    sink.write(dump_bytes(model))


def load_bytes(data: bytes):
    from .pipeline import LemmatizerModel

    if len(data) < _HEAD.size:
        raise TruncatedArchiveError("archive shorter than its header")
    magic, version, count = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError("not a model archive (bad magic bytes)")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"archive format version {version}, this reader supports {FORMAT_VERSION}")
    header_len = _HEAD.size + _ENTRY.size * count + _U32.size
    if len(data) < header_len:
        raise TruncatedArchiveError("archive ends inside its section table")
    (stored_crc,) = _U32.unpack_from(data, header_len - _U32.size)
    if zlib.crc32(data[:header_len - _U32.size]) != stored_crc:
        raise ChecksumError("section table checksum mismatch")

    sections: dict[bytes, bytes] = {}
    end = header_len
    for i in range(count):
        tag, offset, length, crc = _ENTRY.unpack_from(data, _HEAD.size + i * _ENTRY.size)
        if offset + length > len(data):
            raise TruncatedArchiveError(f"section {tag.decode(errors='replace')} is truncated")
        payload = data[offset:offset + length]
        if zlib.crc32(payload) != crc:
            raise ChecksumError(f"section {tag.decode(errors='replace')} checksum mismatch")
        sections[tag] = payload
        end = max(end, offset + length)
    if end != len(data):
        raise ArchiveError(f"{len(data) - end} unexpected bytes after the last section")
    missing = [t.decode() for t in _SECTIONS if t not in sections]
    if missing:
        raise ArchiveError(f"archive lacks sections: {', '.join(missing)}")

    try:
        meta = json.loads(sections[b"META"].decode("utf-8"))
        rules = RuleConfig(**meta["rules"])
        config = SelectorConfig(**meta["selector_config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ArchiveError(f"unreadable META section: {exc}") from exc

    r = _Reader(sections[b"TREE"], "TREE")
    inventory = TreeInventory()
    for _ in range(r.u32()):
        freq = r.u32()
        inventory.intern(_read_tree(r), count=freq)
    r.done()

    r = _Reader(sections[b"LKUP"], "LKUP")
    entries = {}
    for _ in range(r.u32()):
        form, upos = r.str(), r.str()
        feats = tuple((r.str(), r.str()) for _ in range(r.u32()))
        entries[LookupKey(form, upos, feats)] = LookupEntry(r.u32(), r.u32(), r.u32())
    r.done()
    if any(e.tree_id >= len(inventory) for e in entries.values()):
        raise ArchiveError("lookup entry refers to an unknown tree")

    r = _Reader(sections[b"SLCT"], "SLCT")
    rows, cols, fss = r.u32(), r.u32(), r.u32()
    if fss != config.feature_space_size:
        raise ArchiveError("selector feature space does not match its configuration")
    labels = r.array("<u4", cols).astype(np.int64)
    feature_ids = r.array("<u4", rows).astype(np.int64)
    weights = r.array("<f4", rows * cols).reshape(rows, cols).astype(np.float32)
    r.done()
    if cols and labels.max() >= len(inventory):
        raise ArchiveError("selector label refers to an unknown tree")

    selector = SelectorModel(inventory, config, labels, feature_ids, weights)
    return LemmatizerModel(
        lookup=LookupTable(inventory, entries),
        selector=selector,
        inventory=inventory,
        rules=rules,
        format_version=version,
        training_metadata=meta.get("training_metadata", ""),
    )


def load_model(source: BinaryIO):
    return load_bytes(source.read())
