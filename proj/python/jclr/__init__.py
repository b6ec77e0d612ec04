"""Joint contrastive road-network and trajectory embeddings."""

from jclr._core import *  # noqa: F401,F403
from jclr._core import __version__  # noqa: F401
