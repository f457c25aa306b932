"""
Save/Load utilities for run records and JSON artifacts
"""

import json
import os
from datetime import datetime

from version import RECORD_VERSION, VERSION, is_record_compatible


class RunRecord:
    """One CLI invocation: its parameters, backend settings, result payload and the files it wrote"""

    def __init__(self, command, parameters=None, backend=None, result=None, artifacts=None,
                 exit_code=0, started=None, finished=None):
        """
        Initialize a run record.

        Args:
            command (str): CLI verb (search, check, certify, ...)
            parameters (dict, optional): Parsed arguments of the run
            backend (dict, optional): BackendConfig.to_dict() of the solver used
            result (dict, optional): Command-specific result payload
            artifacts (dict, optional): Artifact name -> path of files written by the run
            exit_code (int): Process exit code the run ended with
            started (str, optional): ISO timestamp; defaults to now
            finished (str, optional): ISO timestamp, set by finish()
        """
        self.command = command
        self.parameters = parameters if parameters else {}
        self.backend = backend if backend else {}
        self.result = result if result else {}
        self.artifacts = artifacts if artifacts else {}
        self.exit_code = exit_code
        self.started = started if started else datetime.now().isoformat()
        self.finished = finished

    def add_artifact(self, name, path):
        self.artifacts[name] = str(path)

    def finish(self, exit_code=None):
        """Stamp the end time and optionally the exit code"""
        if exit_code is not None:
            self.exit_code = exit_code
        self.finished = datetime.now().isoformat()
        return self

    def to_dict(self):
        """
        Convert the record to a dictionary.

        Returns:
            dict: Serializable run record
        """
        return {
            "version": RECORD_VERSION,
            "coreforge": VERSION,
            "command": self.command,
            "parameters": self.parameters,
            "backend": self.backend,
            "result": self.result,
            "artifacts": self.artifacts,
            "exit_code": self.exit_code,
            "started": self.started,
            "finished": self.finished,
        }

    @classmethod
    def from_dict(cls, data):
        """
        Create a record from a dictionary.

        Raises:
            ValueError: If the record has no version, an incompatible one, or no command
        """
        if "version" not in data:
            raise ValueError("Invalid run record: missing version")
        if not is_record_compatible(data["version"]):
            raise ValueError(f"Run record version {data['version']} is not compatible with {RECORD_VERSION}")
        if "command" not in data:
            raise ValueError("Invalid run record: missing command")
        return cls(
            command=data["command"],
            parameters=data.get("parameters", {}),
            backend=data.get("backend", {}),
            result=data.get("result", {}),
            artifacts=data.get("artifacts", {}),
            exit_code=data.get("exit_code", 0),
            started=data.get("started"),
            finished=data.get("finished"),
        )


def _json_name(filename):
    return filename if filename.endswith('.json') else filename + '.json'


def write_json(data, filepath):
    """
    Write a JSON artifact, creating parent directories.

    Returns:
        str: Path written
    """
    directory = os.path.dirname(str(filepath))
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
    return str(filepath)


def read_json(filepath):
    """
    Read a JSON artifact.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the file is not valid JSON
    """
    if not os.path.exists(filepath):
        raise FileNotFoundError(f"File not found: {filepath}")
    with open(filepath, 'r', encoding='utf-8') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"Invalid JSON in {filepath}: {exc}")


def save_record(record, filename=None, output_dir="runs"):
    """
    Save a run record to JSON.

    Args:
        record (RunRecord): The record to save
        filename (str, optional): Filename. If None, uses <command>_<timestamp>
        output_dir (str): Directory for run records

    Returns:
        str: Path to saved file
    """
    os.makedirs(output_dir, exist_ok=True)
    if filename is None:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        filename = f"{record.command}_{timestamp}"
    return write_json(record.to_dict(), os.path.join(output_dir, _json_name(filename)))


def load_record(filename, output_dir="runs"):
    """
    Load a run record.

    Raises:
        FileNotFoundError: If the record file doesn't exist
        ValueError: If the record is invalid
    """
    return RunRecord.from_dict(read_json(os.path.join(output_dir, _json_name(filename))))


def list_records(output_dir="runs"):
    """
    List the run records in a directory.

    Returns:
        list[dict]: Record file information, newest first
    """
    if not os.path.exists(output_dir):
        return []

    records = []
    for filename in os.listdir(output_dir):
        if not filename.endswith('.json'):
            continue
        filepath = os.path.join(output_dir, filename)
        stat = os.stat(filepath)
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                data = json.load(f)
            if "command" not in data or "version" not in data:
                continue
            command = data["command"]
            started = data.get("started", "Unknown")
            exit_code = data.get("exit_code")
        except (OSError, ValueError):
            continue

        records.append({
            "filename": filename,
            "filepath": filepath,
            "command": command,
            "started": started,
            "exit_code": exit_code,
            "modified": datetime.fromtimestamp(stat.st_mtime).isoformat(),
            "size": stat.st_size,
        })

    records.sort(key=lambda r: (r["modified"], r["started"]), reverse=True)
    return records


def delete_record(filename, output_dir="runs"):
    """
    Delete a run record.

    Raises:
        FileNotFoundError: If the record file doesn't exist
    """
    filepath = os.path.join(output_dir, _json_name(filename))
    if not os.path.exists(filepath):
        raise FileNotFoundError(f"Run record not found: {filepath}")
    os.remove(filepath)
    return True
