/* C interface to the ctg shared library.
 *
 * Every function that can fail returns an int status: 0 on success, 2 on
 * input/usage errors, 3 on runtime failures (the same codes the CLI exits
 * with). On failure the handle out-parameters are untouched and
 * ctg_last_error() returns a message for the calling thread.
 *
 * Handles are opaque; free them with the matching *_free. Strings returned
 * through char** out-parameters are heap-allocated; release them with
 * ctg_str_free. NULL out-parameters are allowed and skip the allocation.
 */
#ifndef CTG_CTG_H
#define CTG_CTG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CTG_OK 0
#define CTG_ERR_INPUT 2
#define CTG_ERR_RUNTIME 3

const char* ctg_version(void);
const char* ctg_last_error(void);
void ctg_str_free(char* text);

/* ---- datasets ------------------------------------------------------- */

typedef struct ctg_dataset ctg_dataset;

/* Loads a cardiotocography CSV (column order free, header names matched
 * against the built-in schema). */
int ctg_dataset_load(const char* path, ctg_dataset** out);
size_t ctg_dataset_rows(const ctg_dataset* ds);
size_t ctg_dataset_features(const ctg_dataset* ds);
int ctg_dataset_class_count(const ctg_dataset* ds);
/* 1-based NSP label of one row (1=Normal, 2=Suspect, 3=Pathological). */
int ctg_dataset_label(const ctg_dataset* ds, size_t row);
void ctg_dataset_free(ctg_dataset* ds);

/* ---- models --------------------------------------------------------- */

typedef struct ctg_model ctg_model;

int ctg_model_load(const char* path, ctg_model** out);
int ctg_model_save(const ctg_model* model, const char* path);
const char* ctg_model_kind(const ctg_model* model);
size_t ctg_model_features(const ctg_model* model);

/* Scores row-major data (n_rows x n_features). When apply_standardizer is
 * nonzero and the model file bundled one, rows are standardized first, so
 * raw feature values can be passed directly. Writes one 1-based NSP label
 * per row into out_labels. */
int ctg_model_predict(const ctg_model* model, const double* rows,
                      size_t n_rows, size_t n_features,
                      int apply_standardizer, int* out_labels);
void ctg_model_free(ctg_model* model);

/* ---- experiments ---------------------------------------------------- */

typedef struct ctg_experiment ctg_experiment;

/* config_json: full experiment config document; NULL or "" for defaults. */
int ctg_experiment_create(const char* config_json, ctg_experiment** out);
int ctg_experiment_from_file(const char* config_path, ctg_experiment** out);

/* Overrides one config field before the first stage runs. Keys: "data",
 * "out" (alias "out_dir"), "seed", "mode" (paper_faithful | leakage_safe). */
int ctg_experiment_set(ctg_experiment* exp, const char* key,
                       const char* value);

/* Stage runners. Each persists its artifacts under the output directory;
 * out_json (optional) receives a summary document. */
int ctg_experiment_prepare(ctg_experiment* exp, char** out_json);
/* kind: one model kind, or "all" for every selected model. */
int ctg_experiment_tune(ctg_experiment* exp, const char* kind,
                        char** out_json);
/* members: '+'- or ','-separated model kinds, at least two. */
int ctg_experiment_ensemble(ctg_experiment* exp, const char* members);
/* names: ','-separated model/ensemble names; NULL or "" evaluates the
 * configured models plus ensembles. */
int ctg_experiment_evaluate(ctg_experiment* exp, const char* names,
                            char** out_json);
/* Rebuilds all metric tables from persisted predictions only. */
int ctg_experiment_report(ctg_experiment* exp, char** out_json);
void ctg_experiment_free(ctg_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif /* CTG_CTG_H */
