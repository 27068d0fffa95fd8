"""Regenerate the FCIDUMP fixtures and their sidecar metadata.

Requires PySCF. Output is deterministic for a fixed PySCF version.
"""
import json
import os

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf, symm
from pyscf.tools import fcidump

HERE = os.path.dirname(os.path.abspath(__file__))


def fix_phase(mol, mo, atom, labels):
    """Make the largest coefficient on `atom` among AOs matching `labels` positive."""
    idx = [i for i, l in enumerate(mol.ao_labels()) if int(l.split()[0]) == atom and any(s in l for s in labels)]
    out = mo.copy()
    for k in range(mo.shape[1]):
        sub = mo[idx, k]
        j = np.argmax(np.abs(sub))
        if sub[j] < 0:
            out[:, k] *= -1
    return out


def write(name, h1, h2, ecore, norb, nelec, meta):
    path = os.path.join(HERE, name + ".fcidump")
    fcidump.from_integrals(path, h1, h2, norb, nelec, nuc=ecore, ms=0, tol=1e-14)
    solver = fci.direct_spin1.FCI()
    solver.conv_tol = 1e-13
    e, _ = solver.kernel(h1, h2, norb, nelec, ecore=ecore, nroots=1)
    meta = dict(meta)
    meta["fci_energy"] = float(e)
    with open(os.path.join(HERE, name + ".json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    print(name, e)


def hydrogen_chain(name, n, spacing, pairs, charge=0):
    atoms = "; ".join(f"H 0 0 {i * spacing}" for i in range(n))
    mol = gto.M(atom=atoms, basis="sto-3g", unit="Angstrom", charge=charge, verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    mo = mf.mo_coeff
    h1 = mo.T @ mf.get_hcore() @ mo
    h2 = ao2mo.restore(1, ao2mo.kernel(mol, mo), mo.shape[1])
    write(name, h1, h2, mol.energy_nuc(), mo.shape[1], mol.nelectron, {
        "rhf_energy": float(mf.e_tot),
        "orbital_energies": [float(x) for x in mf.mo_energy],
        "localization_pairs": pairs,
        "bond_length": spacing,
    })


def nitrogen(r):
    mol = gto.M(atom=f"N 0 0 0; N 0 0 {r}", basis="sto-3g", unit="Angstrom", symmetry="D2h", verbose=0)
    mf = scf.RHF(mol)
    mf.irrep_nelec = {"Ag": 6, "B1u": 4, "B3u": 2, "B2u": 2, "B2g": 0, "B3g": 0}
    mf.conv_tol = 1e-12
    mf.max_cycle = 200
    mf.kernel()
    assert mf.converged
    labels = list(mf.get_orbsym(mf.mo_coeff))
    irname = {v: k for k, v in symm.param.IRREP_ID_TABLE["D2h"].items()}
    sym = [irname[s] for s in labels]

    def pick(ir, nth):
        ids = [i for i, s in enumerate(sym) if s == ir]
        return ids[nth]

    # valence order: 3sg, pi_ux, pi_uy, pi_gx, pi_gy, 3su
    core = [pick("Ag", 0), pick("B1u", 0), pick("Ag", 1), pick("B1u", 1)]
    act = [pick("Ag", 2), pick("B3u", 0), pick("B2u", 0), pick("B2g", 0), pick("B3g", 0), pick("B1u", 2)]
    mo = mf.mo_coeff.copy()
    mo[:, act[0:1] + act[5:6]] = fix_phase(mol, mo[:, act[0:1] + act[5:6]], 0, ["2pz", "2s"])
    mo[:, [act[1], act[3]]] = fix_phase(mol, mo[:, [act[1], act[3]]], 0, ["2px"])
    mo[:, [act[2], act[4]]] = fix_phase(mol, mo[:, [act[2], act[4]]], 0, ["2py"])
    order = core + act + [i for i in range(mo.shape[1]) if i not in core + act]
    mo = mo[:, order]
    cas = mcscf.CASCI(mf, 6, 6)
    cas.mo_coeff = mo
    h1, ecore = cas.get_h1eff(mo)
    h2 = ao2mo.restore(1, cas.get_h2eff(mo), 6)
    eps = [float(mf.mo_energy[i]) for i in act]
    write(f"n2_{r:.2f}", h1, h2, ecore, 6, 6, {
        "rhf_energy": float(mf.e_tot),
        "orbital_energies": eps,
        "localization_pairs": [[0, 5], [1, 3], [2, 4]],
        "bond_length": r,
    })


if __name__ == "__main__":
    hydrogen_chain("h2", 2, 0.74, [[0, 1]])
    hydrogen_chain("h4", 4, 1.0, [[0, 3], [1, 2]])
    # six-qubit system for the Trotter-order study
    hydrogen_chain("h3p", 3, 0.9, [[0, 2]], charge=1)
    for r in [1.09, 1.5, 2.0, 2.5, 3.0, 4.5]:
        nitrogen(r)
