"""Semantic role labelling over Vietnamese-style constituency trees."""
from .convert import convert_tree, load_rules
from .corpus import GoldRecord, generate_corpus, propositions, read_corpus, write_corpus
from .embeddings import EmbeddingTable, embed_tokens, load_embeddings, project_2d, substitute_embedding
from .evaluation import PRF, cross_validate, learning_curve, per_role_report, score_labels
from .extraction import (Candidate, extract_algorithm1, extract_all_nodes, extract_node_mapping,
                         extract_pruning)
from .features import FeatureVectorizer, assemble, get_feature_set
from .inference import Assignment, IlpProblem, brute_force, solve
from .learning import LinearClassifier, LinearSVMClassifier, MaxEntClassifier, RoleSet
from .pipeline import SemanticRoleLabeler, load_model, save_model
from .treebank import BracketedTree, TreeNode, parse_tree, render_tree

__version__ = "0.1.0"
