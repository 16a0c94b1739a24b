"""
Result files: CSV tables, JSON mirrors and the run manifest.

Every file is written to a `.tmp` sibling and then renamed into place, so a
failed run never leaves a partial file behind. Writes go through one lock.
"""
import os
import json
import time
import asyncio
import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

import aiofiles

from .config import VERSION
from .errors import ResultIOError
from .helpers import format_float, get_readable_time, round_float

logger = logging.getLogger(__name__)


def _json_ready(value):
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    try:
        return round_float(value)
    except (TypeError, ValueError):
        return str(value)


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format_float(value)


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def columns_to_rows(columns: Mapping[str, Sequence[Any]]) -> List[List[Any]]:
    return [list(row) for row in zip(*columns.values())]


class ResultWriter:
    def __init__(self, directory: str):
        self.directory = directory
        self.files: List[str] = []
        self.started = time.time()
        self._lock = asyncio.Lock()

    def path(self, name: str) -> str:
        return os.path.join(self.directory, name)

    async def write_text(self, name: str, text: str) -> str:
        """Atomic write of one result file"""
        path = self.path(name)
        temp_path = f"{path}.tmp"
        async with self._lock:
            try:
                os.makedirs(self.directory, exist_ok=True)
                async with aiofiles.open(temp_path, "w", encoding="utf-8", newline="\n") as f:
                    await f.write(text)
                os.replace(temp_path, path)
            except OSError as e:
                if os.path.exists(temp_path):
                    os.remove(temp_path)
                raise ResultIOError(f"cannot write {path}: {e}") from e
            if name not in self.files:
                self.files.append(name)
        logger.info(f"💾 Wrote {path}")
        return path

    async def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        return await self.write_text(name, csv_text(header, rows))

    async def write_json(self, name: str, payload: Any) -> str:
        text = json.dumps(_json_ready(payload), indent=2, sort_keys=False)
        return await self.write_text(name, text + "\n")

    async def write_table(self, stem: str, header: Sequence[str], rows: Sequence[Sequence[Any]],
                          formats: Sequence[str] = ("csv",)) -> List[str]:
        """CSV and/or JSON records of the same table"""
        written = []
        if "csv" in formats:
            written.append(await self.write_csv(f"{stem}.csv", header, rows))
        if "json" in formats:
            records = [dict(zip(header, row)) for row in rows]
            written.append(await self.write_json(f"{stem}.json", records))
        return written

    async def write_manifest(self, command: str, config_echo: Dict, captured_norm: Optional[float] = None,
                             extra: Optional[Dict] = None) -> str:
        duration = time.time() - self.started
        manifest = {
            "command": command,
            "version": VERSION,
            "files": list(self.files),
            "captured_norm": captured_norm,
            "duration_s": duration,
            "config": config_echo,
        }
        if extra:
            manifest.update(extra)
        path = await self.write_json("manifest.json", manifest)
        logger.info(f"📊 {command} finished in {get_readable_time(duration)}, {len(self.files) - 1} result files")
        return path
