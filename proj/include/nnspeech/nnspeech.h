/* Copyright (c) 2026 nnSpeech Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the nnspeech core. All functions return nns_status; on
 * failure, nns_last_error() holds a human-readable detail string for the
 * calling thread. Handles are opaque and freed with their _free function.
 */

#ifndef NNSPEECH_NNSPEECH_H_
#define NNSPEECH_NNSPEECH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NNS_API __declspec(dllexport)
#else
#define NNS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nns_status {
  NNS_OK = 0,
  NNS_ERR_INVALID_ARGUMENT = 1,
  NNS_ERR_IO = 2,
  NNS_ERR_RUNTIME = 3
} nns_status;

NNS_API const char* nns_last_error(void);
NNS_API const char* nns_version(void);

/* Generates the synthetic corpus described by a key-value spec file into
 * out_dir (waveforms, mels, prosody, symbols.txt, manifest.txt). */
NNS_API nns_status nns_corpus_generate(const char* spec_path,
                                       const char* out_dir);

/* Trains on a generated corpus directory. config_path is a key-value file;
 * extra_config (nullable) holds `key = value` lines that override it, e.g.
 * "seed = 7". Checkpoints and the loss log are written under out_dir. */
NNS_API nns_status nns_train(const char* config_path, const char* corpus_dir,
                             const char* out_dir, const char* extra_config);

typedef struct nns_model nns_model;

NNS_API nns_status nns_model_load(const char* checkpoint_path,
                                  nns_model** out_model);
NNS_API void nns_model_free(nns_model* model);
NNS_API nns_status nns_model_step(const nns_model* model, int64_t* out_step);
NNS_API nns_status nns_model_vocab_size(const nns_model* model,
                                        int32_t* out_vocab);

typedef struct nns_synthesize_options {
  int sample;             /* 0: posterior mean (default); 1: draw noise */
  uint64_t seed;          /* noise seed when sample != 0 */
  int average_s_hat;      /* average predicted embeddings across refs */
} nns_synthesize_options;

/* Synthesizes a mel-spectrogram for the phoneme ids, cloning the speaker of
 * the reference mel files (k-shot averaging over all of them), and writes
 * it to out_mel_path. */
NNS_API nns_status nns_model_synthesize(
    nns_model* model, const int32_t* phoneme_ids, size_t n_phonemes,
    const char* const* reference_mel_paths, size_t n_references,
    const nns_synthesize_options* options /* nullable */,
    const char* out_mel_path);

typedef struct nns_mcd_options {
  int n_cepstra;            /* <= 0 selects the default 13 */
  int use_dtw;              /* 0: frame-aligned; nonzero: DTW (default) */
  double dtw_band_fraction; /* <= 0 selects the default 0.1 */
} nns_mcd_options;

NNS_API nns_status nns_eval_mcd(const char* ref_mel_path,
                                const char* syn_mel_path,
                                const nns_mcd_options* options /* nullable */,
                                double* out_mcd_db);

/* Reads shape information from an NNSPK1 mel file. */
NNS_API nns_status nns_mel_info(const char* mel_path, int64_t* out_frames,
                                int64_t* out_bands);

/* Sweeps write a CSV with header param,mean_mcd_db,std_mcd_db,n. */
NNS_API nns_status nns_sweep_gamma(const char* config_path,
                                   const char* corpus_dir,
                                   const double* gammas, size_t n_gammas,
                                   const char* extra_config,
                                   const char* out_csv_path);

NNS_API nns_status nns_sweep_adaption(const char* checkpoint_path,
                                      const char* corpus_dir,
                                      const int32_t* ks, size_t n_ks,
                                      const char* out_csv_path);

NNS_API nns_status nns_ablate(const char* const* modes, size_t n_modes,
                              const char* config_path, const char* corpus_dir,
                              const char* extra_config,
                              const char* out_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* NNSPEECH_NNSPEECH_H_ */
