from src.reporting.pipeline import MANIFEST, RunManifest, RunPipeline, dumps
