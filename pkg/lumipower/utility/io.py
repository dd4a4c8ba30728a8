__doc__ = """
Atomic output helpers: files and directories are written under a temporary
name and renamed into place once complete.
"""

import contextlib
import os
import shutil
import tempfile
from pathlib import Path

RUN_LOCK_NAME = "run.lock"


def atomic_write_bytes(path: str | Path, payload: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as file:
            file.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: str | Path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


@contextlib.contextmanager
def atomic_output_dir(path: str | Path):
    """
    Yield a temporary sibling directory. On success it replaces `path`;
    on failure it is removed and `path` is left untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=path.parent, prefix=f".{path.name}."))
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if path.exists():
        shutil.rmtree(path)
    os.replace(staging, path)


def write_run_lock(directory: str | Path, config_text: str, command: list[str]):
    """
    Echo the canonical configuration and the invoking command line so the run
    can be repeated exactly.
    """
    header = "# command: " + " ".join(command) + "\n"
    atomic_write_text(Path(directory) / RUN_LOCK_NAME, header + config_text)
