import subprocess
import lmft.utils.constants as CONST

from shlex import split
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from lmft import __spec_version__ as spec_version
from lmft import __version__ as this_version


@dataclass
class RunMetadata:
    """Provenance embedded in every JSON artifact a run writes"""

    head: str
    version: str
    spec: int
    numpy: str
    scipy: str

    def to_dict(self):
        return {
            'head': self.head,
            'version': self.version,
            'spec': self.spec,
            'numpy': self.numpy,
            'scipy': self.scipy,
        }

    @staticmethod
    def _package_version(name: str) -> str:
        try:
            return version(name)
        except PackageNotFoundError:
            return "unknown"

    @staticmethod
    def local_metadata() -> "RunMetadata":
        """Package versions plus the current git commit hash, when there is one"""
        commit_hash = "unknown"
        try:
            result = subprocess.run(
                split("git rev-parse HEAD"),
                check=True,
                capture_output=True,
                cwd=CONST.ROOT_DIR,
            )
            commit = result.stdout.decode().strip()
            if len(commit) == 40:
                commit_hash = commit[:16]
        except (OSError, subprocess.CalledProcessError):
            pass

        return RunMetadata(
            head=commit_hash,
            version=this_version,
            spec=spec_version,
            numpy=RunMetadata._package_version("numpy"),
            scipy=RunMetadata._package_version("scipy"),
        )
