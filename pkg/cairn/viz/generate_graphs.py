#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Stability plots: selection probability against model complexity, one line
per pair, with the pi_sel and pi_bic thresholds marking the relevant region.
"""
import os

import matplotlib as mpl
## catch when we're running linux without X
if os.name == 'posix' and 'DISPLAY' not in os.environ:
    mpl.use('Agg')

import matplotlib.pyplot as plt
import seaborn as sns

from cairn.model_library.defn import StabilityKind

sns.set()
sns.set_context('paper', font_scale=1.5)

TITLES = {StabilityKind.EDGE: 'Edge stability',
          StabilityKind.CAUSAL_PATH: 'Causal path stability',
          }

FILENAMES = {StabilityKind.EDGE: 'edge_stability.svg',
             StabilityKind.CAUSAL_PATH: 'causal_path_stability.svg',
             }


def generate_stability_graph(graph, pi_sel=0.6, pi_bic=None, title=None, label_all=False):
    '''
    Plot the selection probabilities of a StabilityGraph.

    Pairs that reach pi_sel at a complexity no larger than pi_bic are drawn
    in colour and labelled; all other pairs are drawn in grey.

    Parameters
    ----------
    graph : cairn.models.stability.StabilityGraph
    pi_sel : float
        Selection threshold; default is 0.6
    pi_bic : int (optional)
        Complexity threshold; all levels when None
    title : str (optional)
        Default is the kind of stability
    label_all : bool (optional)
        Label every pair, not only the relevant ones; default is False

    Returns
    -------
        (matplotlib.figure.Figure, matplotlib.axes.Axes)
    '''
    levels = graph.levels
    fig, ax = plt.subplots(figsize=(10, 6))

    relevant = [pair for pair in graph.pairs() if graph.max_probability(pair, pi_bic) >= pi_sel]
    palette = sns.color_palette('husl', max(len(relevant), 1))

    for pair in graph.pairs():
        probs = [graph.probability(pair, c) for c in levels]
        if pair in relevant:
            color = palette[relevant.index(pair)]
            ax.plot(levels, probs, color=color, linewidth=2, marker='o', markersize=4, label=graph.pair_label(pair))
        elif label_all:
            ax.plot(levels, probs, linewidth=1, alpha=0.6, label=graph.pair_label(pair))
        else:
            ax.plot(levels, probs, color='#999999', linewidth=0.8, alpha=0.5)

    ax.axhline(pi_sel, color='#333333', linestyle='--', linewidth=1)
    if pi_bic is not None:
        ax.axvline(pi_bic, color='#333333', linestyle=':', linewidth=1)
        left = levels[0] if levels else 0
        ax.axvspan(left, pi_bic, ymin=pi_sel, ymax=1., color='#dddddd', alpha=0.4, zorder=0)

    ax.set_ylim(0., 1.02)
    ax.set_xlabel('Model complexity')
    ax.set_ylabel('Selection probability')
    ax.set_title(title if title is not None else TITLES[graph.kind])
    if relevant or label_all:
        box = ax.get_position()
        ax.set_position([box.x0, box.y0, box.width * 0.75, box.height])
        ax.legend(loc='center left', bbox_to_anchor=(1, 0.5), fontsize='small')

    return fig, ax


def save_stability_graphs(graphs, out_dir, pi_sel=0.6, pi_bic=None):
    '''
    Write one SVG per stability graph into ``out_dir``.

    Returns
    -------
        list of str
            The files written.
    '''
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for graph in graphs:
        fig, ax = generate_stability_graph(graph, pi_sel=pi_sel, pi_bic=pi_bic)
        filename = os.path.join(out_dir, FILENAMES[graph.kind])
        fig.savefig(filename, format='svg', metadata={'Date': None})
        plt.close(fig)
        written.append(filename)
    return written
