#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

from cairn.model_library.graphs.dag import (Dag, Cpdag, is_acyclic, dag_to_cpdag, has_edge,
                                          has_directed_path, random_dag, enumerate_dags, dag_extensions)
