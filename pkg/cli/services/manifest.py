"""
Code manifests: the parameters report, the generator and its labeling, and
provenance digests of the inputs.
"""
import hashlib
import json
import logging

from mec import __version__
from mec.access import Universe
from mec.codes import LinearCode
from mec.construct import parameters_report
from mec.errors import PreconditionError
from mec.field import FieldMatrix, FieldSpec

from cli.utils.io import read_json, sha256_hex

logger = logging.getLogger(__name__)

TOOL = 'mec'
CODE_KEYS = ('q', 'universe', 'labeling', 'generator')


def provenance(inputs: dict[str, bytes]) -> dict:
    return {
        'tool': TOOL,
        'version': __version__,
        'inputs': {name: sha256_hex(data) for name, data in sorted(inputs.items())},
    }


def code_to_dict(code: LinearCode) -> dict:
    return {
        'q': code.q,
        'universe': list(code.universe.names),
        'labeling': [node.name for node in code.labeling],
        'generator': code.generator.to_lists(),
    }


def _digest(spec: dict) -> str:
    text = json.dumps(spec, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode()).hexdigest()


def code_hash(code: LinearCode) -> str:
    """SHA-256 over the compact sorted-key JSON of the code."""
    return _digest(code_to_dict(code))


def build_manifest(code: LinearCode, method: str, tree_text: str) -> dict:
    """
    The parameters report plus the code itself at the top level:
    ``q, k, m, columns_per_node, generator, labeling`` and the node order.
    """
    manifest = parameters_report(code, method)
    manifest.update(code_to_dict(code))
    manifest.update({
        'columns_per_node': code.columns_per_node(),
        'code_hash': code_hash(code),
        'provenance': provenance({'tree': tree_text.encode()}),
    })
    return manifest


def code_from_manifest(manifest: dict) -> LinearCode:
    """
    Rebuild the code a manifest describes.

    Raises:
        PreconditionError: If the manifest is malformed or its code hash does not match
    """
    try:
        expected = manifest.get('code_hash')
        if expected is not None and expected != _digest({key: manifest[key] for key in CODE_KEYS}):
            raise PreconditionError("Manifest code hash does not match its generator")
        universe = Universe(manifest['universe'])
        generator = FieldMatrix.from_rows(FieldSpec(int(manifest['q'])), manifest['generator'])
        labeling = tuple(universe.node(name) for name in manifest['labeling'])
    except (KeyError, TypeError) as e:
        raise PreconditionError(f"Malformed code manifest: missing {e}") from None
    code = LinearCode(generator, labeling, universe)
    logger.debug("Loaded code k=%d m=%d q=%d", code.k, code.m, code.q)
    return code


def load_code(path) -> LinearCode:
    return code_from_manifest(read_json(path))
