from ._spikelab import *  # noqa: F401,F403
from ._spikelab import __version__  # noqa: F401
