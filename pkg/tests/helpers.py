from conecontact.band_forms import ConstantOneForm

# criterion number -> (passed, detail); printed in the terminal summary
ACCEPTANCE = {}


def thetas(model):
    """The constant Lee forms exercised throughout: 0, dt (when present), 0.7 dx."""
    out = [ConstantOneForm.zero(model)]
    if model.t_axis is not None:
        out.append(ConstantOneForm.dt(model))
    c = [0.0] * model.dim
    c[1 if model.t_axis == 0 and model.dim > 1 else 0] = 0.7
    out.append(ConstantOneForm(model, tuple(c)))
    return out


def random_problem(rng, dim, band, theta_index=None, mirrored=None, invariant_sector=True):
    """Random separation problem on S^1 x T^(dim-1).

    ``mirrored`` pairs some generators with their negatives at the same point,
    which forces the exact-current outcome; ``None`` picks it at random.
    """
    import numpy as np

    from conecontact.duality import SeparationProblem
    from conecontact.torus import TWO_PI, TorusModel

    model = TorusModel(dim, band, 0)
    options = thetas(model)
    theta = options[rng.integers(len(options))] if theta_index is None else options[theta_index]
    n = int(rng.integers(1, 9))
    pts = rng.uniform(0, TWO_PI, (n, dim))
    gens = rng.normal(size=(n, dim * (dim - 1) // 2))
    if mirrored is None:
        mirrored = rng.random() < 0.3
    if mirrored:
        pts = np.vstack([pts, pts[:1]])
        gens = np.vstack([gens, -gens[:1]])
    return SeparationProblem(model, theta, band, pts, gens, invariant_sector=invariant_sector)


def farkas_oracle_feasible(M):
    """Independent check of the alternative with scipy's HiGHS: is My >= 1 solvable?"""
    import numpy as np
    from scipy.optimize import linprog

    if M.shape[1] == 0:
        return False
    res = linprog(np.zeros(M.shape[1]), A_ub=-M, b_ub=-np.ones(len(M)),
                  bounds=[(None, None)] * M.shape[1], method="highs")
    return res.status == 0
