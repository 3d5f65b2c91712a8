"""Result files: CSV tables, metadata JSON and plotting scripts."""

import csv
import io
import json
import logging
import os
import tempfile
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from app.core.errors import OutputError

logger = logging.getLogger(__name__)

TIMESTAMP_KEY = "timestamp"


def formatValue(value: Any) -> str:
    """
    CSV cell text: 17 significant digits for floats, lower-case booleans.

    Args:
        value: Cell value

    Returns:
        String representation
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _jsonDefault(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (set, tuple)):
        return list(value)
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")


def toJson(document: Dict[str, Any]) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, default=_jsonDefault, ensure_ascii=False) + "\n"


def tableToCsv(columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    """
    Render a table as CSV text with LF line endings.

    Args:
        columns: Header, also the order of cells
        rows: Mappings containing at least every column

    Returns:
        CSV text
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([formatValue(row.get(column)) for column in columns])
    return buffer.getvalue()


def atomicWrite(path: Path, text: str):
    """
    Write text through a temporary file in the same directory, then rename.

    Args:
        path: Target file
        text: Content

    Raises:
        OutputError: Any I/O failure; the target is left untouched
    """
    path = Path(path)
    tmpName = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", newline="", dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as f:
            tmpName = f.name
            f.write(text)
        os.replace(tmpName, path)
    except OSError as e:
        if tmpName is not None and os.path.exists(tmpName):
            os.unlink(tmpName)
        raise OutputError(f"cannot write {path}: {e}") from e


def stripTimestamp(document: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of a metadata document without the timestamp field."""
    return {key: value for key, value in document.items() if key != TIMESTAMP_KEY}


_PLOT_BODIES = {
    "fig2a": (
        "for v in sorted({r['v_over_gprime'] for r in rows}):\n"
        "    sel = [r for r in rows if r['v_over_gprime'] == v]\n"
        "    plt.plot([r['omega_over_gprime'] for r in sel], [r['fidelity'] for r in sel], label=f\"v = {v:g} g'\")\n"
        "plt.xlabel(\"Omega / g'\")\n"
        "plt.ylabel('F')\n"
    ),
    "fig2b": (
        "for name in ('kappa', 'beta', 'gamma'):\n"
        "    sel = [r for r in rows if r['rate_name'] == name]\n"
        "    plt.plot([r['rate_over_gprime'] for r in sel], [r['fidelity'] for r in sel], label=name)\n"
        "plt.xlabel(\"rate / g'\")\n"
        "plt.ylabel('F')\n"
    ),
    "fig3": (
        "for key in sorted({(r['panel'], r['param_value'], r['model'], r['qubit']) for r in rows}):\n"
        "    sel = [r for r in rows if (r['panel'], r['param_value'], r['model'], r['qubit']) == key]\n"
        "    style = '--' if key[2] == 'effective' else '-'\n"
        "    plt.plot([r['g_t'] for r in sel], [r['fidelity_corrected'] for r in sel], style, label=str(key))\n"
        "plt.xlabel('g t')\n"
        "plt.ylabel('F')\n"
    ),
    "fig4": (
        "pairs = sorted({(r['axis1_name'], r['axis2_name']) for r in rows})\n"
        "fig, axes = plt.subplots(1, len(pairs), figsize=(3 * len(pairs), 3))\n"
        "for ax, pair in zip(axes, pairs):\n"
        "    sel = [r for r in rows if (r['axis1_name'], r['axis2_name']) == pair]\n"
        "    ax.tricontourf([r['axis1_rel_dev'] for r in sel], [r['axis2_rel_dev'] for r in sel],\n"
        "                   [r['fidelity_corrected'] for r in sel])\n"
        "    ax.set_xlabel(pair[0])\n"
        "    ax.set_ylabel(pair[1])\n"
    ),
}


def plotScript(name: str, csvName: str, columns: Sequence[str]) -> str:
    """
    Matplotlib script text that plots a written CSV table.

    Args:
        name: Scenario or run name selecting the layout
        csvName: File name of the table next to the script
        columns: Table header, used by the generic layout

    Returns:
        Python source text
    """
    body = _PLOT_BODIES.get(name)
    if body is None:
        x, y = columns[0], columns[-1]
        body = f"plt.plot([r[{x!r}] for r in rows], [r[{y!r}] for r in rows])\nplt.xlabel({x!r})\nplt.ylabel({y!r})\n"
    return (
        f'"""Plot {csvName}."""\n\n'
        "import csv\n\n"
        "import matplotlib.pyplot as plt\n\n\n"
        "def _cell(text):\n"
        "    try:\n"
        "        return float(text)\n"
        "    except ValueError:\n"
        "        return text\n\n\n"
        f"with open({csvName!r}, newline='') as f:\n"
        "    rows = [{k: _cell(v) for k, v in r.items()} for r in csv.DictReader(f)]\n\n"
        f"{body}"
        "if plt.gca().get_legend_handles_labels()[0]:\n"
        "    plt.legend()\n"
        "plt.show()\n"
    )


class ResultWriter:
    """Write result tables and their metadata into an output directory."""

    def __init__(self, outputDir: str, outputFormat: str = "csv", plotScripts: bool = False):
        """
        Initialize result writer.

        Args:
            outputDir: Target directory, created when missing
            outputFormat: "csv" (table plus .meta.json) or "json" (single file)
            plotScripts: Also write <name>.plot.py next to each CSV
        """
        if outputFormat not in ("csv", "json"):
            raise OutputError(f"unknown output format {outputFormat!r}")
        self.outputDir = Path(outputDir)
        self.outputFormat = outputFormat
        self.plotScripts = plotScripts

    def _metaDocument(
        self, config: Dict[str, Any], metadata: Dict[str, Any], flags: Sequence[str]
    ) -> Dict[str, Any]:
        return {
            "config": config,
            "metadata": metadata,
            "flags": list(flags),
            TIMESTAMP_KEY: datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }

    def writeTable(
        self,
        name: str,
        columns: Sequence[str],
        rows: Sequence[Dict[str, Any]],
        config: Optional[Dict[str, Any]] = None,
        metadata: Optional[Dict[str, Any]] = None,
        flags: Sequence[str] = (),
        extra: Optional[Dict[str, Any]] = None,
    ) -> List[Path]:
        """
        Write one table with its metadata.

        Args:
            name: File stem
            columns: Header
            rows: Table rows
            config: Resolved configuration to embed
            metadata: Derived values (μ, t₀, comparisons, ...)
            flags: Regime flags
            extra: Further top-level keys for the single JSON file

        Returns:
            Paths written, table first
        """
        meta = self._metaDocument(config or {}, metadata or {}, flags)
        written = []
        if self.outputFormat == "json":
            document = dict(meta)
            document.update(extra or {})
            document["columns"] = list(columns)
            document["rows"] = [{column: row.get(column) for column in columns} for row in rows]
            path = self.outputDir / f"{name}.json"
            atomicWrite(path, toJson(document))
            written.append(path)
        else:
            csvPath = self.outputDir / f"{name}.csv"
            atomicWrite(csvPath, tableToCsv(columns, rows))
            metaPath = self.outputDir / f"{name}.meta.json"
            atomicWrite(metaPath, toJson(meta))
            written += [csvPath, metaPath]
            if self.plotScripts:
                scriptPath = self.outputDir / f"{name}.plot.py"
                atomicWrite(scriptPath, plotScript(name, csvPath.name, columns))
                written.append(scriptPath)
        for path in written:
            logger.info("wrote %s", path)
        return written

    def writeDocument(self, name: str, document: Dict[str, Any]) -> Path:
        """Write a standalone JSON document as <name>.json."""
        path = self.outputDir / f"{name}.json"
        atomicWrite(path, toJson(document))
        logger.info("wrote %s", path)
        return path
