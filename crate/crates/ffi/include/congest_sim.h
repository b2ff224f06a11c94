/* C ABI for the adversarial CONGEST broadcast simulator.
 *
 * Conventions:
 *   - every function returns a CsStatus; results go to out-parameters;
 *   - handles are opaque and freed by their *_free function exactly once;
 *   - strings returned through out-parameters are UTF-8, NUL-terminated,
 *     and freed with cs_string_free;
 *   - cs_last_error() returns a thread-local message for the most recent
 *     non-OK status on this thread.
 */

#ifndef CONGEST_SIM_H
#define CONGEST_SIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum CsStatus {
  CS_OK = 0,
  CS_ERR_NULL_ARG = 1,
  CS_ERR_UTF8 = 2,
  CS_ERR_JSON = 3,
  CS_ERR_INVALID_ARG = 4,
  CS_ERR_RUN = 5,
  CS_ERR_PANIC = 6
} CsStatus;

/* Opaque handles. */
typedef struct CsGraph CsGraph;
typedef struct CsFamily CsFamily;

/* Library version (static string; do not free). */
const char *cs_version(void);

/* Thread-local message for the most recent failure (do not free). */
const char *cs_last_error(void);

/* Frees a string returned through an out-parameter. NULL is ignored. */
void cs_string_free(char *s);

/* Graphs ----------------------------------------------------------------- */

/* Build from a generator spec, e.g.
 *   {"kind":"circulant","n":16,"offsets":[1,2],"seed":0}
 * Kinds: cycle | circulant | hypercube | torus | random_regular | complete.
 */
CsStatus cs_graph_generate(const char *spec_json, CsGraph **out);

/* Parse the "n m" header / "u v" lines edge-list text format. */
CsStatus cs_graph_from_edge_list(const char *text, CsGraph **out);

void cs_graph_free(CsGraph *g);
uint32_t cs_graph_node_count(const CsGraph *g);
uint32_t cs_graph_edge_count(const CsGraph *g);
CsStatus cs_graph_diameter(const CsGraph *g, uint32_t *out);
CsStatus cs_graph_edge_connectivity(const CsGraph *g, uint32_t *out);

/* Covering families ------------------------------------------------------ */

/* Build from a spec, e.g.
 *   {"flavor":"hash","l":28,"seed":7}
 *   {"flavor":"sampled","l":16,"k":2,"seed":1}
 *   {"flavor":"expander-directed","t":2,"seed":3}
 * Optional "constants" object: a1, a2, h_min, q_min, b, ell_cap, c_f, gamma.
 */
CsStatus cs_family_build(const CsGraph *g, const char *spec_json,
                         CsFamily **out);

/* Reconstruct a family bit-exactly from its descriptor JSON. */
CsStatus cs_family_from_descriptor(const char *descriptor_json,
                                   CsFamily **out);

void cs_family_free(CsFamily *f);
uint32_t cs_family_subgraph_count(const CsFamily *f);

/* Membership of edge `edge` (direction toward the higher-id endpoint when
 * toward_high != 0; undirected flavors ignore the direction) in subgraph
 * `index`. Returns 1/0, or -1 on bad arguments. */
int32_t cs_family_member(const CsFamily *f, uint32_t edge, int32_t toward_high,
                         uint32_t index);

/* Maximal number of subgraphs avoiding a fixed edge. */
CsStatus cs_family_width(const CsFamily *f, uint32_t *out);

/* Descriptor JSON ({flavor params, seed, ell, m}); free with
 * cs_string_free. */
CsStatus cs_family_descriptor_json(const CsFamily *f, char **out);

/* Simulation ------------------------------------------------------------- */

/* Run an experiment batch from a configuration JSON (the same schema the
 * congest-sim CLI accepts) and return the batch report JSON. */
CsStatus cs_simulate(const char *config_json, char **out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* CONGEST_SIM_H */
