"""
gainscope - Output Storage

Writes reports, CSV surfaces and certificates under one output directory.
File contents never embed timestamps or random identifiers, so identical
runs produce byte-identical files.
"""
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union


def content_hash(data: Union[str, bytes]) -> str:
    """Compute SHA-256 hex digest of text or bytes."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def format_real(value: Any) -> str:
    """Format a CSV cell; floats use 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


@dataclass
class OutputRef:
    """
    Reference to a written output file.
    """
    name: str
    path: str
    checksum: str
    size_bytes: int
    kind: str = "text"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OutputRef":
        """Create from dictionary."""
        return cls(**data)


class OutputStorage:
    """
    Output directory manager.

    Directory structure:
        <base>/
        ├── summary.json
        ├── certificate_<kind>.json
        ├── sweep.csv / levelset.csv / invariance.csv
        └── timings.json   # wall times, outside the determinism contract
    """

    def __init__(self, base_path: Optional[Union[str, Path]] = None):
        """
        Initialize output storage.

        Args:
            base_path: Output directory. If None, uses default from settings.
        """
        if base_path is None:
            from ..config.settings import settings
            base_path = settings.output.base_path

        self._base_path = Path(base_path)
        self._base_path.mkdir(parents=True, exist_ok=True)
        self._written: List[OutputRef] = []

    @property
    def base_path(self) -> Path:
        return self._base_path

    @property
    def written(self) -> List[OutputRef]:
        """Files written through this instance, in write order."""
        return list(self._written)

    def _resolve(self, name: str) -> Path:
        path = (self._base_path / name).resolve()
        if self._base_path.resolve() not in path.parents:
            raise ValueError(f"Output name escapes base directory: {name}")
        return path

    def save(self, data: bytes, name: str, kind: str = "text") -> OutputRef:
        """
        Save bytes under the output directory.

        Args:
            data: File content
            name: Relative file name
            kind: Free-form content tag (text, json, csv)

        Returns:
            OutputRef for the written file
        """
        path = self._resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)

        ref = OutputRef(
            name=name,
            path=str(path),
            checksum=content_hash(data),
            size_bytes=len(data),
            kind=kind,
        )
        self._written.append(ref)
        return ref

    def save_text(self, text: str, name: str) -> OutputRef:
        """Save text file (UTF-8, LF line endings)."""
        return self.save(text.encode("utf-8"), name, kind="text")

    def save_json(self, obj: Any, name: str) -> OutputRef:
        """Save JSON with sorted keys so output is stable for diffing."""
        text = json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        return self.save(text.encode("utf-8"), name, kind="json")

    def save_csv(
        self,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        name: str,
    ) -> OutputRef:
        """Save CSV; real values are written with 17 significant digits."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_real(cell) for cell in row])
        return self.save(buffer.getvalue().encode("utf-8"), name, kind="csv")

    def load_text(self, name: str) -> str:
        """
        Load text file.

        Raises:
            FileNotFoundError: If file doesn't exist
        """
        path = self._resolve(name)
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        return path.read_text(encoding="utf-8")

    def load_json(self, name: str) -> Any:
        """Load JSON file."""
        return json.loads(self.load_text(name))

    def exists(self, name: str) -> bool:
        """Check if file exists."""
        return self._resolve(name).exists()

    def list_files(self) -> List[Path]:
        """List all files under the output directory, sorted."""
        return sorted(p for p in self._base_path.rglob("*") if p.is_file())
