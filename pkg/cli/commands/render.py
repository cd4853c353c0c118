"""`mec render`: draw an access tree to an image file."""
import argparse

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from mec.access import tree_to_graph  # noqa: E402

from cli.utils.io import read_tree  # noqa: E402


def register(subparsers) -> None:
    parser = subparsers.add_parser('render', help="Draw the access tree")
    parser.add_argument('--tree', required=True)
    parser.add_argument('--out', required=True, help="Image path (format from the extension)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    tree, _ = read_tree(args.tree)
    graph = tree_to_graph(tree)
    pos = nx.multipartite_layout(graph, subset_key='depth', align='horizontal')
    pos = {v: (x, -y) for v, (x, y) in pos.items()}
    colors = ['#9ecae1' if graph.nodes[v]['kind'] == 'leaf' else '#fdd0a2' for v in graph.nodes]
    labels = nx.get_node_attributes(graph, 'label')

    width = max(4.0, 0.6 * sum(1 for v in graph.nodes if graph.nodes[v]['kind'] == 'leaf'))
    fig, ax = plt.subplots(figsize=(width, 4))
    nx.draw(graph, pos, ax=ax, labels=labels, node_color=colors, node_size=700, font_size=9, arrows=False)
    ax.set_axis_off()
    fig.savefig(args.out, bbox_inches='tight')
    plt.close(fig)
    print(f"wrote {args.out}: {graph.number_of_nodes()} vertices")
    return 0
