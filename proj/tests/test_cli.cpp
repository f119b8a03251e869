// Copyright (c) 2026 nnSpeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// End-to-end exercise of the installed command-line surface:
// corpus generate -> train -> synthesize -> eval mcd -> sweeps.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

int RunCli(const std::string& args, const std::string& log_path) {
  const std::string cmd = std::string(NNS_CLI_PATH) + " " + args + " > " +
                          log_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: usage and error exits") {
  const std::string dir = nns::test::TempDir("cli_usage");
  CHECK(RunCli("", dir + "/noargs.log") == 1);
  CHECK(Slurp(dir + "/noargs.log").find("Usage") != std::string::npos);
  CHECK(RunCli("--definitely-not-a-flag", dir + "/badflag.log") == 1);
  CHECK(RunCli("corpus generate --spec /nonexistent.txt --out " + dir,
               dir + "/badspec.log") == 2);
}

TEST_CASE("cli: subcommands compose end to end") {
  const std::string dir = nns::test::TempDir("cli_e2e");
  const std::string corpus_dir = dir + "/corpus";
  const std::string train_dir = dir + "/train";

  {
    std::ofstream spec(dir + "/spec.txt");
    spec << "n_speakers = 4\nutterances_per_speaker = 6\n"
            "phoneme_vocab_size = 10\nseed = 31\n"
            "unseen_speaker_fraction = 0.25\n";
  }
  {
    std::ofstream cfg(dir + "/train.txt");
    cfg << "stage1_steps = 8\nstage2_steps = 12\nbatch_size = 4\nseed = 2\n"
           "d_x = 16\nd_c = 16\nd_z = 8\nd_s = 16\nmlp_hidden = 24\n"
           "ffn_dim = 24\nadaptor_dim = 16\nconv_channels = 12\n"
           "prosody_bins = 16\n";
  }
  {
    std::ofstream ph(dir + "/phonemes.txt");
    ph << "1 4 2 3\n";
  }

  CHECK(RunCli("corpus generate --spec " + dir + "/spec.txt --out " +
                   corpus_dir,
               dir + "/corpus.log") == 0);
  REQUIRE(fs::exists(corpus_dir + "/manifest.txt"));

  CHECK(RunCli("train --config " + dir + "/train.txt --corpus " + corpus_dir +
                   " --out " + train_dir,
               dir + "/train.log") == 0);
  const std::string ckpt = train_dir + "/ckpt_final.nnsckpt";
  REQUIRE(fs::exists(ckpt));

  // k = 1 reference + phoneme text file -> one mel file.
  const std::string out_mel = dir + "/synth.nns";
  CHECK(RunCli("synthesize --checkpoint " + ckpt + " --phonemes " + dir +
                   "/phonemes.txt --ref " + corpus_dir +
                   "/mel/spk03_utt000.nns --out " + out_mel,
               dir + "/synth.log") == 0);
  CHECK(fs::exists(out_mel));

  CHECK(RunCli("eval mcd --ref " + corpus_dir +
                   "/mel/spk03_utt001.nns --syn " + out_mel,
               dir + "/mcd.log") == 0);
  CHECK(Slurp(dir + "/mcd.log").find("mcd_db=") != std::string::npos);

  // Adaption sweep on the trained checkpoint.
  CHECK(RunCli("sweep adaption --checkpoint " + ckpt + " --corpus " +
                   corpus_dir + " --k 1 2 --out " + dir + "/adapt",
               dir + "/adapt.log") == 0);
  const std::string adapt_csv = Slurp(dir + "/adapt/sweep_adaption.csv");
  CHECK(adapt_csv.find("param,mean_mcd_db,std_mcd_db,n") == 0);

  // Gamma sweep (default grid) over a micro config: header + 3 data rows.
  CHECK(RunCli("sweep gamma --config " + dir + "/train.txt --corpus " +
                   corpus_dir + " --out " + dir + "/gamma",
               dir + "/gamma.log") == 0);
  const std::string gamma_csv = Slurp(dir + "/gamma/sweep_gamma.csv");
  int rows = 0;
  for (char ch : gamma_csv) {
    if (ch == '\n') ++rows;
  }
  CHECK(rows == 4);  // header + one row per default-grid value
  CHECK(gamma_csv.find("0.05,") != std::string::npos);
  CHECK(gamma_csv.find("0.0005,") != std::string::npos);

  // Ablations: three modes -> three rows.
  CHECK(RunCli("ablate --config " + dir + "/train.txt --corpus " + corpus_dir +
                   " --out " + dir + "/ablate",
               dir + "/ablate.log") == 0);
  const std::string ab_csv = Slurp(dir + "/ablate/ablation.csv");
  CHECK(ab_csv.find("content_add,") != std::string::npos);
  CHECK(ab_csv.find("no_spk_pred,") != std::string::npos);
  CHECK(ab_csv.find("full,") != std::string::npos);

  // Determinism of a repeated sweep with the same seed and config.
  CHECK(RunCli("sweep gamma --config " + dir + "/train.txt --corpus " +
                   corpus_dir + " --gammas 0.005 --out " + dir + "/g1",
               dir + "/g1.log") == 0);
  CHECK(RunCli("sweep gamma --config " + dir + "/train.txt --corpus " +
                   corpus_dir + " --gammas 0.005 --out " + dir + "/g2",
               dir + "/g2.log") == 0);
  CHECK(Slurp(dir + "/g1/sweep_gamma.csv") ==
        Slurp(dir + "/g2/sweep_gamma.csv"));
}
