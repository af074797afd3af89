# src/galgeo/cli/loader.py
import logging
from pathlib import Path
from typing import List, Tuple, Union

from pydantic import ValidationError

from src.galgeo.base import SystemFileError
from src.galgeo.schema import SystemFile

logger = logging.getLogger(__name__)


def load_system_file(path: Union[str, Path]) -> SystemFile:
    """Read and validate a JSON system file.

    Expression errors and symmetry violations surface as their own
    GalgeoError subclasses; everything else becomes SystemFileError.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemFileError(f"cannot read {path}: {exc}") from exc
    try:
        document = SystemFile.model_validate_json(text)
    except ValidationError as exc:
        raise SystemFileError(f"invalid system file {path}: {exc}") from exc
    logger.debug("loaded %s (n=%d, name=%r)", path, document.n, document.name)
    return document


def load_corpus(directory: Union[str, Path]) -> List[Tuple[Path, SystemFile]]:
    """Every *.json system file in a directory, sorted by name."""
    return [(path, load_system_file(path)) for path in sorted(Path(directory).glob("*.json"))]
