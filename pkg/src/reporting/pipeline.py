import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config.config import Config
from src import __version__
from src.errors import ValidationError
from src.sim.pool import SamplePool, config_hash

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
FORMATS = ('json', 'csv')


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, 'value') and isinstance(getattr(value, 'value'), str):
        return value.value
    return str(value)


def dumps(document: Dict) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(document, sort_keys=True, indent=2, default=_jsonable)


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: Optional[int]
    version: str
    arguments: Dict
    started: str
    finished: Optional[str] = None
    outputs: List[str] = field(default_factory=list)

    def to_json(self) -> Dict:
        return asdict(self)


class RunPipeline:
    """Output stage of a command: run directory, tables, JSON documents and the manifest"""

    def __init__(self, command: str, arguments: Dict, seed: Optional[int] = None,
                 out_dir: Optional[str] = None, fmt: str = 'json'):
        if fmt not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}, got {fmt!r}")
        self.config = Config()
        self.fmt = fmt
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.run_dir = out_dir or os.path.join(self.config.OUTPUT_DIR, f"{command}_{timestamp}")
        self.manifest = RunManifest(
            command=command,
            config_hash=config_hash(arguments),
            seed=seed,
            version=__version__,
            arguments=arguments,
            started=datetime.now().isoformat(timespec='seconds'),
        )
        os.makedirs(self.run_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        path = os.path.join(self.run_dir, name)
        self.manifest.outputs.append(name)
        return path

    def save_json(self, document: Dict, name: str) -> str:
        filepath = self._path(f"{name}.json")
        with open(filepath, 'w') as handle:
            handle.write(dumps(dict(document, manifest=MANIFEST)))
        logger.info(f"Saved {name} to {filepath}")
        return filepath

    def save_table(self, df: pd.DataFrame, name: str) -> str:
        """Write a table in the run format; CSV carries a manifest comment header."""
        if self.fmt == 'json':
            return self.save_json({'columns': list(df.columns), 'rows': df.to_dict(orient='records')}, name)
        filepath = self._path(f"{name}.csv")
        with open(filepath, 'w') as handle:
            handle.write(f"# manifest: {MANIFEST}\n")
            df.to_csv(handle, index=False, float_format='%.17g')
        logger.info(f"Saved {len(df)} rows to {filepath}")
        return filepath

    def save_pool(self, pool: SamplePool, name: str) -> str:
        """Samples as CSV (or JSON) plus a Parquet copy for bulk loading."""
        if self.fmt == 'csv':
            filepath = pool.to_csv(self._path(f"{name}.csv"), manifest=MANIFEST)
        else:
            filepath = self.save_json({'tag': pool.tag, 'seed': pool.seed, 'generator': pool.generator_id,
                                       'config_hash': pool.config_hash,
                                       'values': pool.values,
                                       'censored': pool.censored}, name)
        parquet = self._path(f"{name}.parquet")
        pool.to_frame().to_parquet(parquet, index=False)
        logger.info(f"Saved {pool.n} samples to {parquet}")
        return filepath

    def finish(self) -> str:
        self.manifest.finished = datetime.now().isoformat(timespec='seconds')
        filepath = os.path.join(self.run_dir, MANIFEST)
        with open(filepath, 'w') as handle:
            handle.write(dumps(self.manifest.to_json()))
        logger.info(f"Run {self.manifest.command} written to {self.run_dir} "
                    f"({len(self.manifest.outputs)} outputs)")
        return filepath

