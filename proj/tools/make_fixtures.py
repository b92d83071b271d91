#!/usr/bin/env python3
"""Regenerates the checked-in dataset, CIFs, corpus documents and canned LLM
replies. Replay fixtures and goldens are then recorded with tools/record_fixtures.sh."""

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
FIX = ROOT / "tests" / "fixtures"

MASS = {"H": 1.008, "C": 12.011, "N": 14.007, "O": 15.999, "Zn": 65.38, "Co": 58.933, "Ni": 58.693,
        "Cu": 63.546, "Zr": 91.224, "Mg": 24.305, "Mn": 54.938, "Cd": 112.41, "Fe": 55.845, "Al": 26.982,
        "S": 32.06, "F": 18.998, "Cl": 35.45}

DOI_MAIN = "10.1021/acs.cgd.9b00001"
DOI_NOTABLE = "10.1039/c9ce00002a"
DOI_CORRUPT = "10.1016/j.ica.2019.00003"


def mw(elements):
    return round(sum(MASS[e] * n for e, n in elements.items()), 2)


def record(code, name, abbr, doi, sg, system, cell, elements, pore, number=None):
    a, b, c, al, be, ga = cell
    pld, lcd, density, vsa, gsa, vf = pore
    return {
        "ccdc_code": code,
        "ccdc_number": number,
        "chemical_name": name,
        "abbreviation": abbr,
        "doi": doi,
        "url": f"https://doi.org/{doi}" if doi else None,
        "space_group": sg,
        "crystal_system": system,
        "a": a, "b": b, "c": c, "alpha": al, "beta": be, "gamma": ga,
        "elements": elements,
        "molecular_weight": mw(elements),
        "pore": {"pld": pld, "lcd": lcd, "density": density, "vsa": vsa, "gsa": gsa, "void_fraction": vf},
    }


# Hand-authored records the fixtures and canonical queries refer to.
NAMED = [
    record("ABAYUY", "[Zn(L)(H2O)]·DMF", None, DOI_MAIN, "P21/c", "monoclinic",
           (10.234, 14.567, 11.892, 90, 105.43, 90), {"C": 16, "H": 16, "N": 2, "O": 6, "Zn": 1},
           (3.12, 5.48, 1.402, 812.4, 579.5, 0.31), "1890001"),
    record("ABAYEI", "[Co(L)(H2O)]·DMF", None, DOI_MAIN, "P21/c", "monoclinic",
           (10.198, 14.602, 11.874, 90, 105.61, 90), {"C": 16, "H": 16, "N": 2, "O": 6, "Co": 1},
           (3.08, 5.41, 1.385, 798.1, 576.2, 0.30), "1890002"),
    record("ABAYIM", "[Ni(L)(H2O)]·DMF", None, DOI_MAIN, "P21/c", "monoclinic",
           (10.176, 14.588, 11.851, 90, 105.72, 90), {"C": 16, "H": 16, "N": 2, "O": 6, "Ni": 1},
           (3.05, 5.39, 1.391, 790.6, 568.4, 0.30), "1890003"),
    record("CUTABE", "[Cu2(ptc)(H2O)2]", None, DOI_NOTABLE, "Fm-3m", "cubic",
           (26.343, 26.343, 26.343, 90, 90, 90), {"C": 9, "H": 7, "O": 8, "Cu": 2},
           (6.51, 13.20, 0.879, 1621.0, 1844.1, 0.72), "1890004"),
    record("CORRPT", "[Mn(bdc)(dmf)]", None, DOI_CORRUPT, "C2/c", "monoclinic",
           (18.012, 11.203, 9.871, 90, 98.12, 90), {"C": 11, "H": 11, "N": 1, "O": 5, "Mn": 1},
           (2.41, 4.02, 1.512, 410.2, 271.3, 0.22), "1890005"),
    record("VUJBEI", "Zn4O(bdc)3 pillared analogue", None, "10.1021/ja0000101", "Fm-3m", "cubic",
           (25.832, 25.832, 25.832, 90, 90, 90), {"C": 24, "H": 12, "O": 13, "Zn": 4},
           (7.81, 11.92, 0.621, 2318.7, 3733.8, 0.78), "1290001"),
    record("QOWTIG", "Cu3(btc)2 derivative", None, "10.1021/ja0000102", "Fm-3m", "cubic",
           (26.271, 26.271, 26.271, 90, 90, 90), {"C": 18, "H": 6, "O": 12, "Cu": 3},
           (6.52, 13.17, 0.883, 2095.5, 2373.2, 0.75), "1290002"),
    record("SAHYIK", "Zn4O(bdc)3", "MOF-5", "10.1038/46248", "Fm-3m", "cubic",
           (25.832, 25.832, 25.832, 90, 90, 90), {"C": 24, "H": 12, "O": 13, "Zn": 4},
           (7.77, 15.01, 0.593, 2283.4, 3850.6, 0.79), "1290003"),
    record("SAHYOQ", "Zn4O(bdc)3 cobalt-doped", "MOF-5(Co)", "10.1038/46249", "Fm-3m", "cubic",
           (25.851, 25.851, 25.851, 90, 90, 90), {"C": 24, "H": 12, "O": 13, "Zn": 3, "Co": 1},
           (7.74, 14.96, 0.601, 2270.1, 3777.2, 0.78), "1290004"),
    record("SAHYUW", "Zn4O(NH2-bdc)3", "MOF-5-NH2", "10.1038/46250", "Fm-3m", "cubic",
           (25.901, 25.901, 25.901, 90, 90, 90), {"C": 24, "H": 15, "N": 3, "O": 13, "Zn": 4},
           (7.52, 14.62, 0.633, 2194.8, 3467.3, 0.77), "1290005"),
    record("EDUSIF", "Zn4O(bdc)3 analogue", "MOF-50", "10.1038/46251", "P4/mmm", "tetragonal",
           (14.201, 14.201, 17.332, 90, 90, 90), {"C": 16, "H": 8, "O": 9, "Zn": 2},
           (5.11, 8.64, 0.912, 1405.2, 1540.8, 0.58), "1290006"),
]

SPACE_GROUPS = [("P21/c", "monoclinic"), ("C2/c", "monoclinic"), ("P-1", "triclinic"), ("Pnma", "orthorhombic"),
                ("Fm-3m", "cubic"), ("I4/mmm", "tetragonal"), ("R-3m", "trigonal"), ("P63/mmc", "hexagonal")]
METALS = ["Zn", "Co", "Ni", "Cu", "Zr", "Mg", "Mn", "Cd", "Fe", "Al"]


def random_records(n, seed=20241019):
    rng = random.Random(seed)
    taken = {r["ccdc_code"] for r in NAMED}
    out = []
    while len(out) < n:
        code = "".join(rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ") for _ in range(6))
        if rng.random() < 0.15:
            code += f"{rng.randint(1, 9):02d}"
        if code in taken:
            continue
        taken.add(code)
        sg, system = rng.choice(SPACE_GROUPS)
        a = round(rng.uniform(5, 40), 3)
        if system == "cubic":
            cell = (a, a, a, 90, 90, 90)
        elif system in ("tetragonal",):
            cell = (a, a, round(rng.uniform(5, 40), 3), 90, 90, 90)
        elif system in ("hexagonal", "trigonal"):
            cell = (a, a, round(rng.uniform(5, 40), 3), 90, 90, 120)
        elif system == "orthorhombic":
            cell = (a, round(rng.uniform(5, 40), 3), round(rng.uniform(5, 40), 3), 90, 90, 90)
        elif system == "monoclinic":
            cell = (a, round(rng.uniform(5, 40), 3), round(rng.uniform(5, 40), 3), 90,
                    round(rng.uniform(91, 120), 2), 90)
        else:
            cell = (a, round(rng.uniform(5, 40), 3), round(rng.uniform(5, 40), 3),
                    round(rng.uniform(70, 110), 2), round(rng.uniform(70, 110), 2), round(rng.uniform(70, 110), 2))
        metal = rng.choice(METALS)
        elements = {"C": rng.randint(4, 40), "H": rng.randint(2, 40), "O": rng.randint(2, 16), metal: rng.randint(1, 4)}
        if rng.random() < 0.5:
            elements["N"] = rng.randint(1, 8)
        pld = round(rng.uniform(0.5, 20), 2)
        lcd = round(pld + rng.uniform(0, 10), 2)
        pore = (pld, lcd, round(rng.uniform(0.2, 2.5), 3), round(rng.uniform(0, 3500), 1),
                round(rng.uniform(0, 5000), 1), round(rng.uniform(0, 0.95), 3))
        abbr = None
        out.append(record(code, f"{metal} framework {code.lower()}", abbr, f"10.9999/synthetic.{len(out):04d}",
                          sg, system, cell, dict(sorted(elements.items())), pore))
    return out


def cif_text(r, atoms):
    lines = [f"data_{r['ccdc_code']}",
             f"_chemical_name_systematic '{r['chemical_name']}'",
             f"_chemical_formula_sum '{' '.join(f'{e}{int(n)}' for e, n in r['elements'].items())}'",
             f"_symmetry_space_group_name_H-M '{r['space_group']}'",
             f"_space_group_crystal_system {r['crystal_system']}"]
    for k in ("a", "b", "c"):
        lines.append(f"_cell_length_{k} {r[k]}")
    for k in ("alpha", "beta", "gamma"):
        lines.append(f"_cell_angle_{k} {r[k]}")
    lines += ["", "loop_", "_atom_site_label", "_atom_site_type_symbol",
              "_atom_site_fract_x", "_atom_site_fract_y", "_atom_site_fract_z"]
    for label, el, x, y, z in atoms:
        lines.append(f"{label} {el} {x:.4f} {y:.4f} {z:.4f}")
    return "\n".join(lines) + "\n"


def framework_atoms(r, rng):
    metal = next(e for e in r["elements"] if e not in ("C", "H", "N", "O"))
    atoms = [(f"{metal}1", metal, 0.25, 0.25, 0.25), (f"{metal}2", metal, 0.75, 0.75, 0.75)]
    for i in range(4):
        atoms.append((f"O{i + 1}", "O", 0.25 + 0.06 * math.cos(i), 0.25 + 0.06 * math.sin(i), 0.30))
    for i in range(6):
        atoms.append((f"C{i + 1}", "C", 0.40 + 0.03 * i, 0.40 + 0.02 * i, 0.45 - 0.01 * i))
    if "N" in r["elements"]:
        atoms.append(("N1", "N", 0.60, 0.55, 0.40))
    return atoms


# ---- corpus documents ----

MAIN_TEXT = """Three isostructural pillared-layer frameworks assembled from a pyridyl-isophthalate linker

Abstract
Three coordination polymers, [Zn(L)(H2O)]·DMF (1), [Co(L)(H2O)]·DMF (2) and [Ni(L)(H2O)]·DMF (3), were obtained under solvothermal conditions and characterized by single-crystal X-ray diffraction.

Experimental section
Materials and methods. All reagents were purchased from commercial sources and used without further purification. The ligand 5-(pyridin-4-yl)isophthalic acid (H2L) was prepared by a modified literature procedure. The auxiliary linker 1,4-bis(imidazol-1-ylmethyl)benzene, hereafter L1, was used only in control experiments. Powder X-ray diffraction patterns were recorded on a Rigaku diffractometer.

Synthesis of H2L. Dimethyl 5-bromoisophthalate (2.73 g, 10 mmol) and 4-pyridylboronic acid (1.35 g, 11 mmol) were coupled under Suzuki conditions in dioxane at 90 °C for 24 h, and the ester was hydrolysed with NaOH to give H2L as a white powder. Yield: 78%.

Synthesis of [Zn(L)(H2O)]·DMF (1). A mixture of Zn(NO3)2·6H2O (29.7 mg, 0.10 mmol), H2L (24.3 mg, 0.10 mmol), DMF (5 mL) and H2O (5 mL) was sealed in a 20 mL Teflon-lined stainless steel autoclave and heated at 120 °C for 72 h. After cooling to room temperature, colorless block crystals of 1 were collected by filtration. Yield: 65% based on Zn. Anal. Calcd for C16H16N2O6Zn: C, 48.32; H, 4.05; N, 7.04%. Found: C, 48.10; H, 4.21; N, 7.15%. IR (KBr, cm-1): 3421 (s), 1612 (vs), 1386 (s).

Synthesis of [Co(L)(H2O)]·DMF (2). Co(NO3)2·6H2O (29.1 mg, 0.10 mmol) and H2L (24.3 mg, 0.10 mmol) were dissolved in DMF (4 mL) and H2O (2 mL) in a 20 mL glass vial, two drops of HNO3 were added, and the vial was heated at 100 °C for 3 days. Pink block crystals of 2 formed on the vial walls. Yield: 58% based on Co. IR (KBr, cm-1): 3410 (s), 1605 (vs), 1380 (s).

Synthesis of [Ni(L)(H2O)]·DMF (3). Compound 3 was prepared in the same way as 2, using Ni(NO3)2·6H2O (29.1 mg, 0.10 mmol) in place of the cobalt salt, DMF (4 mL) and H2O (2 mL), at 110 °C for 72 h. Green prismatic crystals of 3 were obtained. Yield: 52% based on Ni.

X-ray crystallography
Table 1 Crystal data and structure refinement for 1-3.
Compound | 1 | 2 | 3
Empirical formula | C16H16N2O6Zn | C16H16CoN2O6 | C16H16N2NiO6
Formula weight | 397.69 | 391.24 | 391.00
Crystal system | monoclinic | monoclinic | monoclinic
Space group | P21/c | P21/c | P21/c
a (Å) | 10.234(2) | 10.198(3) | 10.176(2)
b (Å) | 14.567(3) | 14.602(3) | 14.588(4)
c (Å) | 11.892(2) | 11.874(2) | 11.851(3)
α (°) | 90 | 90 | 90
β (°) | 105.43(1) | 105.61(2) | 105.72(1)
γ (°) | 90 | 90 | 90
Color | colorless | pink | green

Results and discussion
Compounds 1-3 are isostructural. Each metal centre is coordinated by three carboxylate oxygen atoms, one pyridyl nitrogen atom and one water molecule, and the resulting layers are pillared into a three-dimensional framework with one-dimensional channels occupied by DMF molecules.
"""

MAIN_SI = """Supplementary information
Thermogravimetric analysis. Samples of 1-3 lose the lattice DMF molecules between 150 and 260 °C and decompose above 400 °C.
"""

NOTABLE_TEXT = """A copper paddle-wheel framework for acetylene storage

Experimental
Synthesis of [Cu2(ptc)(H2O)2]. Cu(NO3)2·2.5H2O (46.5 mg, 0.20 mmol) and biphenyl-3,3',5,5'-tetracarboxylic acid (H4ptc, 33.0 mg, 0.10 mmol) were dissolved in a mixture of DMF (3 mL), ethanol (1 mL) and water (1 mL) with 50 uL of HCl, and heated at 85 °C for 48 h. Blue octahedral crystals were isolated. Yield: 71%.

Crystallographic data were deposited with the CCDC; the cell parameters are discussed in the text rather than tabulated.
"""

CORRUPT_TEXT = """A manganese terephthalate with coordinated DMF

Experimental
Synthesis of [Mn(bdc)(dmf)]. MnCl2·4H2O (19.8 mg, 0.10 mmol) and 1,4-benzenedicarboxylic acid (H2bdc, 16.6 mg, 0.10 mmol) in DMF (6 mL) were heated in a 23 mL Teflon-lined autoclave at 150 °C for 2 days. Colourless needles were obtained. Yield: 44%.

Table 1 Crystal data for [Mn(bdc)(dmf)].
Empirical formula | C11H11?NO5Mn##
Crystal system | monoclinic
Space group | C2/c
a (Å) | 18.012(4)
b (Å) | 11.203(2)
c (Å) | 9.871(2)
β (°) | 98.12(3)
"""


def paragraph(text, start, end_marker):
    i = text.index(start)
    j = text.index(end_marker, i) if end_marker else len(text)
    return text[i:j].strip()


def canned_replies():
    zn = paragraph(MAIN_TEXT, "Synthesis of [Zn(L)", "\n\nSynthesis of [Co")
    co = paragraph(MAIN_TEXT, "Synthesis of [Co(L)", "\n\nSynthesis of [Ni")
    # The model reply resolves the bridging reference "in the same way as 2".
    ni = ("Synthesis of [Ni(L)(H2O)]·DMF (3). Ni(NO3)2·6H2O (29.1 mg, 0.10 mmol) and H2L (24.3 mg, 0.10 mmol) "
          "were dissolved in DMF (4 mL) and H2O (2 mL) in a 20 mL glass vial, two drops of HNO3 were added, and the "
          "vial was heated at 110 °C for 72 h. Green prismatic crystals of 3 were obtained. Yield: 52% based on Ni.")
    h2l = paragraph(MAIN_TEXT, "Synthesis of H2L.", "\n\nSynthesis of [Zn")
    cu = paragraph(NOTABLE_TEXT, "Synthesis of [Cu2", "\n\nCrystallographic")
    mn = paragraph(CORRUPT_TEXT, "Synthesis of [Mn", "\n\nTable 1")

    def cell(name, formula, weight, a, b, c, beta, color):
        return {"Compound": name, "Empirical formula": formula, "Formula weight": weight,
                "Crystal system": "monoclinic", "Space group": "P21/c", "a (Å)": a, "b (Å)": b, "c (Å)": c,
                "α (°)": 90, "β (°)": beta, "γ (°)": 90, "Color": color}

    rules = [
        {"template": "synthesis", "contains": "pyridyl-isophthalate linker",
         "reply": {"paragraphs": [
             {"compound_hint": "H2L", "kind": "ligand", "text": h2l},
             {"compound_hint": "1", "kind": "mof", "text": zn},
             {"compound_hint": "2", "kind": "mof", "text": co},
             {"compound_hint": "3", "kind": "mof", "text": ni}]}},
        {"template": "tables", "contains": "pyridyl-isophthalate linker",
         "reply": {"entries": [
             cell("1", "C16H16N2O6Zn", "397.69", "10.234(2)", "14.567(3)", "11.892(2)", "105.43(1)", "colorless"),
             cell("2", "C16H16CoN2O6", "391.24", "10.198(3)", "14.602(3)", "11.874(2)", "105.61(2)", "pink"),
             cell("3", "C16H16N2NiO6", "391.00", "10.176(2)", "14.588(4)", "11.851(3)", "105.72(1)", "green"),
             # A second table row with most cell data missing (dropped by the dual-threshold filter).
             {"Compound": "H2L", "Empirical formula": "C13H9NO4", "Crystal system": None}]}},
        {"template": "synthesis", "contains": "acetylene storage",
         "reply": {"paragraphs": [{"compound_hint": "[Cu2(ptc)(H2O)2]", "kind": "mof", "text": cu}]}},
        {"template": "tables", "contains": "acetylene storage",
         "reply": "The text does not contain a crystal data table, so there is nothing to extract."},
        {"template": "synthesis", "contains": "manganese terephthalate",
         "reply": {"paragraphs": [{"compound_hint": "[Mn(bdc)(dmf)]", "kind": "mof", "text": mn}]}},
        {"template": "tables", "contains": "manganese terephthalate",
         "reply": {"entries": [{"Compound": "[Mn(bdc)(dmf)]", "Empirical formula": "C11H11?NO5Mn##",
                                "Crystal system": "monoclinic", "Space group": "C2/c", "a (Å)": "18.012(4)",
                                "b (Å)": "11.203(2)", "c (Å)": "9.871(2)", "α (°)": 90, "β (°)": "98.12(3)",
                                "γ (°)": 90}]}},
        {"template": "structured", "contains": "Zn(NO3)2·6H2O (29.7 mg",
         "reply": {"metal_source": "Zn(NO3)2·6H2O", "organic_linkers_source": "H2L", "modulator_source": None,
                   "solvent_source": "DMF, H2O", "quantity_of_metal": "29.7 mg, 0.10 mmol",
                   "quantity_of_organic_linkers": "24.3 mg, 0.10 mmol", "quantity_of_modulator": None,
                   "quantity_of_solvent": "5 mL and 5 mL", "synthesis_temperature": "120 °C",
                   "synthesis_time": "72 h", "crystal_morphology": "colorless block crystals", "yield": "65%",
                   "equipment": "20 mL Teflon-lined stainless steel autoclave"}},
        {"template": "structured", "contains": "Co(NO3)2·6H2O (29.1 mg",
         "reply": {"metal_source": "Co(NO3)2·6H2O", "organic_linkers_source": "H2L", "modulator_source": "HNO3",
                   "solvent_source": "DMF, H2O", "quantity_of_metal": "29.1 mg, 0.10 mmol",
                   "quantity_of_organic_linkers": "24.3 mg, 0.10 mmol", "quantity_of_modulator": "two drops",
                   "quantity_of_solvent": "4 mL and 2 mL", "synthesis_temperature": "100 °C",
                   "synthesis_time": "3 days", "crystal_morphology": "pink block crystals", "yield": "58%",
                   "equipment": "20 mL glass vial"}},
        {"template": "structured", "contains": "Ni(NO3)2·6H2O (29.1 mg",
         "reply": {"metal_source": "Ni(NO3)2·6H2O", "organic_linkers_source": "H2L", "modulator_source": "HNO3",
                   "solvent_source": "DMF, H2O", "quantity_of_metal": "29.1 mg, 0.10 mmol",
                   "quantity_of_organic_linkers": "24.3 mg, 0.10 mmol", "quantity_of_modulator": "two drops",
                   "quantity_of_solvent": "4 mL and 2 mL", "synthesis_temperature": "110 °C",
                   "synthesis_time": "72 h", "crystal_morphology": "green prismatic crystals", "yield": "52%",
                   "equipment": "20 mL glass vial"}},
        {"template": "structured", "contains": "Cu(NO3)2·2.5H2O",
         "reply": {"metal_source": "Cu(NO3)2·2.5H2O", "organic_linkers_source": "H4ptc", "modulator_source": "HCl",
                   "solvent_source": "DMF, ethanol, water", "quantity_of_metal": "46.5 mg, 0.20 mmol",
                   "quantity_of_organic_linkers": "33.0 mg, 0.10 mmol", "quantity_of_modulator": "50 uL",
                   "quantity_of_solvent": "3 mL, 1 mL and 1 mL", "synthesis_temperature": "85 °C",
                   "synthesis_time": "48 h", "crystal_morphology": "blue octahedral crystals", "yield": "71%",
                   "equipment": None}},
    ]
    rules += query_parse_replies()
    rules += [
        # Deliberately misquotes the PLD so the faithfulness check must reject it.
        {"template": "query_answer", "contains": "What is the PLD of SAHYIK?",
         "reply": {"answer": "SAHYIK has a PLD of 9.99 Å."}},
        {"template": "query_answer", "contains": "What is the PLD of MOF-5?",
         "reply": {"answer": "MOF-5 (SAHYIK) has a PLD of 7.77 Å."}},
    ]
    return rules


def pq(query_type, materials=(), properties=(), uses_context=False, rmin=None, rmax=None, op="none",
       page_size=None, reasoning=None):
    return {"query_type": query_type, "uses_context": uses_context, "materials": list(materials),
            "properties": list(properties), "range": {"min": rmin or {}, "max": rmax or {}},
            "operation": {"type": op, "value": None}, "reasoning": reasoning or ["replayed"],
            "page_size": page_size, "paged_index": None}


# Replies a parsing model gives for the canonical questions (values as documented).
CANONICAL = [
    ("What is the PLD of MOF-5?", pq("property", ["MOF-5"], ["PLD (Å)"])),
    ("What is the PLD of VUJBEI?", pq("property", ["VUJBEI"], ["PLD (Å)"])),
    ("What is the PLD of SAHYIK?", pq("property", ["SAHYIK"], ["PLD (Å)"])),
    ("What about its density?", pq("property", [], ["Density (g/cm3)"], uses_context=True)),
    ("Find MOFs with PLD between 7.5 and 10 Å and LCD between 10 and 16 Å",
     pq("range", [], ["PLD (Å)", "LCD (Å)"], rmin={"PLD": 7.5, "LCD": 10}, rmax={"PLD": 10, "LCD": 16})),
    ("Give me MOFs with PLD between 7.5-10 Å, LCD between 10-16 Å, and VSA between 2000-2400 m2/cm3",
     pq("range", [], ["PLD (Å)", "LCD (Å)", "Accessible_Surface_Area (m2/cm3)"],
        rmin={"PLD Å": 7.5, "LCD Å": 10, "VSA m2/cm3": 2000}, rmax={"PLD Å": 10, "LCD Å": 16, "VSA m2/cm3": 2400})),
    ("Compare the density of VUJBEI and QOWTIG", pq("comparison", ["VUJBEI", "QOWTIG"], ["Density (g/cm3)"])),
    ("What is the average density of the MOF-5 series?",
     pq("statistical", ["MOF-5"], ["Density (g/cm3)"], op="mean")),
    ("Find the MOF with the maximum density", pq("statistical", [], ["Density (g/cm3)"], op="max")),
    ("Show more results", pq("paging", uses_context=True)),
    ("Give me 5 more", pq("paging", uses_context=True, page_size=5)),
]


def query_parse_replies():
    # Each canonical question is unique as a substring of the others.
    return [{"template": "query_parse", "contains": q, "reply": reply} for q, reply in CANONICAL]


def gold_records():
    def rec(code, text, fields):
        base = {k: None for k in ("metal_source", "organic_linkers_source", "modulator_source", "solvent_source",
                                  "quantity_of_metal", "quantity_of_organic_linkers", "quantity_of_modulator",
                                  "quantity_of_solvent", "synthesis_temperature", "synthesis_time",
                                  "crystal_morphology", "yield", "equipment")}
        base.update(fields)
        return {"ccdc_code": code, "synthesis_text": text, "structured": base}

    zn = paragraph(MAIN_TEXT, "Synthesis of [Zn(L)", "Anal. Calcd").strip()
    co = paragraph(MAIN_TEXT, "Synthesis of [Co(L)", "IR (KBr").strip()
    ni = paragraph(MAIN_TEXT, "Synthesis of [Ni(L)", "\n\nX-ray")
    return [
        rec("ABAYUY", zn, {"metal_source": "Zn(NO3)2·6H2O", "organic_linkers_source": "5-(pyridin-4-yl)isophthalic acid (H2L)",
            "solvent_source": "DMF, H2O", "quantity_of_metal": "0.10 mmol, 29.7 mg",
            "quantity_of_organic_linkers": "24.3 mg, 0.10 mmol", "quantity_of_solvent": "10 mL",
            "synthesis_temperature": "120 oC", "synthesis_time": "72 hours", "crystal_morphology": "colorless block crystals",
            "yield": "0.65", "equipment": "Teflon-lined stainless steel autoclave"}),
        rec("ABAYEI", co, {"metal_source": "Co(NO3)2·6H2O", "organic_linkers_source": "H2L", "modulator_source": "HNO3",
            "solvent_source": "DMF, H2O", "quantity_of_metal": "29.1 mg, 0.10 mmol",
            "quantity_of_organic_linkers": "24.3 mg, 0.10 mmol", "quantity_of_modulator": "two drops",
            "quantity_of_solvent": "6 mL", "synthesis_temperature": "100 °C", "synthesis_time": "3 days",
            "crystal_morphology": "pink blocks", "yield": "58%", "equipment": "glass vial"}),
        rec("ABAYIM", ni, {"metal_source": "Ni(NO3)2·6H2O", "organic_linkers_source": "H2L",
            "solvent_source": "DMF, H2O", "quantity_of_metal": "29.1 mg, 0.10 mmol",
            "quantity_of_organic_linkers": "24.3 mg, 0.10 mmol", "quantity_of_solvent": "4 mL and 2 mL",
            "synthesis_temperature": "110 °C", "synthesis_time": "72 h", "crystal_morphology": "green prisms",
            "yield": "52%", "equipment": "Teflon-lined autoclave"}),
    ]


def main():
    DATA.mkdir(exist_ok=True)
    (DATA / "cifs").mkdir(exist_ok=True)
    records = NAMED + random_records(200 - len(NAMED))
    records.sort(key=lambda r: r["ccdc_code"])
    with open(DATA / "dataset.jsonl", "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")

    rng = random.Random(7)
    for r in records:
        if r in NAMED or rng.random() < 0.1:
            (DATA / "cifs" / f"{r['ccdc_code']}.cif").write_text(cif_text(r, framework_atoms(r, rng)), encoding="utf-8")

    corpus = FIX / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    (corpus / "cgd_9b00001.txt").write_text(MAIN_TEXT, encoding="utf-8")
    (corpus / "cgd_9b00001_si.txt").write_text(MAIN_SI, encoding="utf-8")
    (corpus / "ce_00002.txt").write_text(NOTABLE_TEXT, encoding="utf-8")
    (corpus / "ica_00003.txt").write_text(CORRUPT_TEXT, encoding="utf-8")
    manifest = [
        {"doi": DOI_MAIN, "path": "cgd_9b00001.txt", "ccdc_codes": ["ABAYUY", "ABAYEI", "ABAYIM"],
         "si": ["cgd_9b00001_si.txt"]},
        {"doi": DOI_NOTABLE, "path": "ce_00002.txt", "ccdc_codes": ["CUTABE"]},
        {"doi": DOI_CORRUPT, "path": "ica_00003.txt", "ccdc_codes": ["CORRPT"]},
    ]
    (corpus / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    canned = canned_replies()
    (FIX / "canned.json").write_text(json.dumps(canned, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    gold = gold_records()
    with open(FIX / "gold.jsonl", "w", encoding="utf-8") as f:
        for g in gold:
            f.write(json.dumps(g, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
