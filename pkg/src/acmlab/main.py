"""
ACM Lab dashboard - browse runs and explore the geometry behind deep GNNs on manifolds.
Run with: streamlit run src/acmlab/main.py
"""

import os
import sys
from pathlib import Path

import streamlit as st

# Add src directory to Python path for imports
src_dir = Path(__file__).parent.parent
if str(src_dir) not in sys.path:
    sys.path.insert(0, str(src_dir))

from acmlab.config.constants import RUNS_DIR
from acmlab.pages import geometry, results, theory

# --- PAGE CONFIG ---
st.set_page_config(
    page_title="ACM Lab",
    layout="wide",
    initial_sidebar_state="expanded",
)

# Hide Streamlit's default page navigation
st.markdown(
    """
    <style>
        [data-testid="stSidebarNav"] {
            display: none;
        }
    </style>
    """,
    unsafe_allow_html=True,
)

st.sidebar.title("ACM Lab")

# --- NAVIGATION ---
with st.sidebar:
    st.header("Navigation")
    page = st.selectbox(
        "Select Page",
        ["Run Results", "Contraction Checks", "Manifold Geometry"],
        key="nav_page",
        label_visibility="collapsed",
    )
    st.divider()
    runs_dir = st.text_input("Runs directory", value=os.environ.get("ACMLAB_RUNS_DIR", RUNS_DIR))

ctx = {
    "runs_dir": runs_dir,
    "run_dirs": results.list_runs(runs_dir),
}

# --- PAGE ROUTING ---
if page == "Run Results":
    results.render(ctx)

elif page == "Contraction Checks":
    theory.render(ctx)

elif page == "Manifold Geometry":
    geometry.render(ctx)
