# modules/storage/data_manager.py
"""
Data Manager - coefficient cache, run directories and report files

Cache files are JSON-lines written by atomic rename, so concurrent readers
never see a half-written file. Reports are written with sorted keys so the
same inputs give byte-identical files.
"""

import hashlib
import json
import logging
import os
import re
import tempfile
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Iterable, List

LOGGER = logging.getLogger(__name__)

_SAFE_NAME = re.compile(r"[^A-Za-z0-9._-]+")
EULER_SUFFIX = ".euler.jsonl"


def get_file_size(file_path: Path) -> int:
    """Get file size in bytes"""
    try:
        return file_path.stat().st_size
    except OSError:
        return 0


def get_directory_size(directory: Path) -> int:
    """Get total size of directory in bytes"""
    total_size = 0
    try:
        for item in directory.rglob('*'):
            if item.is_file():
                total_size += get_file_size(item)
    except OSError as e:
        LOGGER.warning("error calculating size of %s: %s", directory, e)
    return total_size


def safe_name(label: str) -> str:
    """File-system safe form of a label ("39.8.c.a" stays as is)."""
    return _SAFE_NAME.sub("_", label).strip("_") or "unnamed"


def cache_path(cache_dir: Path, label: str) -> Path:
    return Path(cache_dir) / f"{safe_name(label)}.jsonl"


def euler_cache_path(cache_dir: Path, f_label: str, g_label: str) -> Path:
    """Local factors of a pair sit next to the coefficient files."""
    return Path(cache_dir) / f"{safe_name(f_label)}__{safe_name(g_label)}{EULER_SUFFIX}"


def write_jsonl_atomic(path: Path, records: Iterable[Dict[str, Any]]) -> Path:
    """
    Write records as JSON lines through a temp file and rename.

    Args:
        path: destination file
        records: JSON-serializable dicts

    Returns:
        The destination path
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True))
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def read_jsonl(path: Path) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def parameter_digest(payload: Dict[str, Any]) -> str:
    """Short stable hash of a JSON-serializable dict."""
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def run_dir(out_dir: Path, identity: str, parameters: Dict[str, Any]) -> Path:
    """
    Run directory named after the identity and a digest of its parameters.

    The same parameters always map to the same directory.
    """
    path = Path(out_dir) / f"{safe_name(identity)}-{parameter_digest(parameters)}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    """Deterministic JSON file (sorted keys, fixed indent), written atomically."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def get_storage_info(data_dir: Path) -> Dict:
    """
    Get storage information for data directory

    Args:
        data_dir: Path to data directory (holding cache/ and runs/)

    Returns:
        Dictionary with storage statistics
    """
    cache_dir = data_dir / "cache"
    runs_dir = data_dir / "runs"

    info = {
        'cache_size_mb': get_directory_size(cache_dir) / (1024 * 1024),
        'runs_size_mb': get_directory_size(runs_dir) / (1024 * 1024),
        'total_size_mb': 0,
        'cached_forms': 0,
        'cached_factor_sets': 0,
        'runs_count': 0,
    }

    try:
        info['cached_forms'] = len([p for p in cache_dir.glob('*.jsonl') if not p.name.endswith(EULER_SUFFIX)])
        info['cached_factor_sets'] = len(list(cache_dir.glob(f"*{EULER_SUFFIX}")))
        info['runs_count'] = len([p for p in runs_dir.iterdir() if p.is_dir()])
    except OSError:
        pass

    info['total_size_mb'] = info['cache_size_mb'] + info['runs_size_mb']
    return info


def cleanup_old_runs(out_dir: Path, days_to_keep: int = 7) -> Dict:
    """
    Delete run directories older than N days (the cache is never touched)

    Args:
        out_dir: Path to runs directory
        days_to_keep: Keep runs from last N days

    Returns:
        Cleanup statistics
    """
    cutoff_date = datetime.now() - timedelta(days=days_to_keep)

    stats = {
        'runs_deleted': 0,
        'space_freed_mb': 0,
        'errors': []
    }

    if not out_dir.exists():
        return stats

    for run in out_dir.iterdir():
        if not run.is_dir():
            continue
        try:
            run_time = datetime.fromtimestamp(run.stat().st_mtime)
            if run_time < cutoff_date:
                size_mb = get_directory_size(run) / (1024 * 1024)
                for item in sorted(run.rglob('*'), reverse=True):
                    item.unlink() if item.is_file() else item.rmdir()
                run.rmdir()
                stats['runs_deleted'] += 1
                stats['space_freed_mb'] += size_mb
        except OSError as e:
            stats['errors'].append(f"Error deleting {run.name}: {e}")

    LOGGER.info("deleted %d runs, freed %.2f MB", stats['runs_deleted'], stats['space_freed_mb'])
    if stats['errors']:
        LOGGER.warning("%d errors during cleanup", len(stats['errors']))

    return stats
