"""Sub-psi families and the registry used to build them from scenario configs
"""
from sglr_toolkit.app.exceptions import UnsupportedFamilyError
from sglr_toolkit.app.families.base import FamilyKind, PsiFamily, Side
from sglr_toolkit.app.families.builtin import Bernoulli, Poisson, SubExponential, SubGaussian
from sglr_toolkit.app.families.custom import CustomFamily, MirroredFamily


FAMILIES = {
    "gaussian": SubGaussian,
    "subgaussian": SubGaussian,
    "subexponential": SubExponential,
    "bernoulli": Bernoulli,
    "poisson": Poisson,
}


def get_family(name: str, **params) -> PsiFamily:
    """Builds a built-in family by name

    :param name: one of the FAMILIES keys
    :type name: str
    :return: PsiFamily
    """

    try:
        family_cls = FAMILIES[name.lower()]
    except KeyError as exception:
        raise UnsupportedFamilyError(
            f"unknown family {name}, expected one of {', '.join(sorted(FAMILIES))}"
        ) from exception
    return family_cls(**params)
