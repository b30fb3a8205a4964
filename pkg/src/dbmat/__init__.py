"""
Matrix-valued rational functions and de Branges matrices.

Exact arithmetic over Q(i) where possible (``RatMat`` with
``GaussianRational`` coefficients), float arithmetic otherwise.
"""

from .classes import *  # noqa: F401,F403
from .debranges import *  # noqa: F401,F403
from .factorization import *  # noqa: F401,F403
from .generators import *  # noqa: F401,F403
from .grids import *  # noqa: F401,F403
from .herglotz import *  # noqa: F401,F403
from .localstruct import *  # noqa: F401,F403
from .modelfile import *  # noqa: F401,F403
from .parametrize import *  # noqa: F401,F403
from .ratmat import *  # noqa: F401,F403
from .regions import *  # noqa: F401,F403
from .series import *  # noqa: F401,F403
from .verdict import *  # noqa: F401,F403

__version__ = "0.1.0"
