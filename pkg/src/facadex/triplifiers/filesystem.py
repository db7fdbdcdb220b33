"""Directories and archives: folders are containers, file names are values."""

from __future__ import annotations

import io
import os
import tarfile
import zipfile
from typing import Dict, Optional

from ..errors import SourceError
from .base import SlicePlan, fail
from .builder import FacadeBuilder, Path

Tree = Dict[str, Optional["Tree"]]  # None marks a file


def emit_tree(builder: FacadeBuilder, path: Path, tree: Tree) -> None:
    for i, name in enumerate(sorted(tree), 1):
        sub = tree[name]
        if sub is None:
            builder.string(path, i, name)
        else:
            emit_tree(builder, builder.container(path, i), sub)


def directory_tree(root: str) -> Tree:
    tree: Tree = {}
    try:
        with os.scandir(root) as entries:
            for entry in entries:
                # symlinked directories are listed as names, never followed
                tree[entry.name] = directory_tree(entry.path) if entry.is_dir(follow_symlinks=False) else None
    except OSError as exc:
        raise SourceError(f"cannot list directory ({exc.strerror})", root) from exc
    return tree


def _insert(tree: Tree, name: str, is_dir: bool) -> None:
    parts = [p for p in name.replace("\\", "/").split("/") if p and p != "."]
    if not parts:
        return
    node = tree
    for part in parts[:-1]:
        existing = node.get(part)
        if existing is None:
            existing = node[part] = {}
        node = existing
    last = parts[-1]
    if is_dir:
        if node.get(last) is None:
            node[last] = {}
    else:
        node.setdefault(last, None)


def archive_tree(data: bytes) -> Tree:
    tree: Tree = {}
    if zipfile.is_zipfile(io.BytesIO(data)):
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            for info in zf.infolist():
                _insert(tree, info.filename, info.is_dir())
        return tree
    with tarfile.open(fileobj=io.BytesIO(data), mode="r:*") as tf:
        for member in tf.getmembers():
            _insert(tree, member.name, member.isdir())
    return tree


def plan_directory(src, options, sliced: bool = False) -> SlicePlan:
    if src.path is None:
        raise fail(src, "directory sources must be local paths")
    tree = directory_tree(str(src.path))
    return SlicePlan(lambda b, r: emit_tree(b, r, tree), iter(()))


def plan_archive(src, options, sliced: bool = False) -> SlicePlan:
    data = src.read()
    try:
        tree = archive_tree(data)
    except (tarfile.TarError, zipfile.BadZipFile, EOFError, OSError) as exc:
        raise fail(src, f"corrupt or unsupported archive: {exc}", exc)
    return SlicePlan(lambda b, r: emit_tree(b, r, tree), iter(()))


def triplify_directory(src, builder: FacadeBuilder) -> None:
    plan_directory(src, builder.options).run(builder)


def triplify_archive(src, builder: FacadeBuilder) -> None:
    plan_archive(src, builder.options).run(builder)
