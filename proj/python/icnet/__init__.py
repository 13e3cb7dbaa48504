from ._icnet import *  # noqa: F401,F403
from ._icnet import __doc__  # noqa: F401
