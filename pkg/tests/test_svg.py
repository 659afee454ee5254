import xml.dom.minidom

import numpy as np
import pytest

from ringharm.construct import power_shear_for_alpha, sc_shear_map
from ringharm.domains import Annulus, Teichmuller
from ringharm.svg import render_grid_svg, render_spec_svg


def test_annulus_grid_is_valid_svg():
    text = render_grid_svg(lambda z: z, Annulus(1, 2), resolution=50, n_lines=4)
    doc = xml.dom.minidom.parseString(text)
    assert doc.documentElement.tagName == "svg"
    # 4 circles and 8 rays
    assert len(doc.getElementsByTagName("polyline")) == 12
    assert "evaluation gaps: 0" in text


def test_gaps_are_counted():
    def f(z):
        z = np.asarray(z)
        return np.where(z.real > 0, z, np.nan)
    text = render_grid_svg(f, Annulus(1, 2), resolution=40, n_lines=2)
    assert "evaluation gaps: 0" not in text


def test_slit_domain_grid():
    text = render_spec_svg(sc_shear_map(1.0, 2.0), resolution=40, n_lines=3)
    xml.dom.minidom.parseString(text)


def test_power_shear_grid_survives_pole():
    text = render_spec_svg(power_shear_for_alpha(2.0, 1.2), resolution=41, n_lines=3)
    xml.dom.minidom.parseString(text)


def test_resolution_checked():
    with pytest.raises(ValueError):
        render_grid_svg(lambda z: z, Teichmuller(1.0), resolution=1)
