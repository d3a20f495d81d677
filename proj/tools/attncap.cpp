// Copyright 2026 The attncap Authors. All Rights Reserved.
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

// attncap command-line tool. Talks to the library through the C API only.

#include <attncap/attncap.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

// Status code plus message; the exit code is derived from the status.
struct Failure {
  int code;
  std::string message;
};

void check(attncap_status s) {
  if (s != ATTNCAP_OK) throw Failure{s, attncap_last_error()};
}

[[noreturn]] void usage(const std::string& message) {
  throw Failure{ATTNCAP_E_USAGE, message};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Lexicon = Handle<attncap_lexicon, attncap_lexicon_free>;
using Vocab = Handle<attncap_vocab, attncap_vocab_free>;
using Dataset = Handle<attncap_dataset, attncap_dataset_free>;
using Model = Handle<attncap_model, attncap_model_free>;
using Trainer = Handle<attncap_trainer, attncap_trainer_free>;
using Image = Handle<attncap_image, attncap_image_free>;
using Caption = Handle<attncap_caption, attncap_caption_free>;
using Grammar = Handle<attncap_grammar, attncap_grammar_free>;

struct Options {
  std::string captions, features, lexicon, vocab, checkpoint, out, config;
  std::string optimizer = "adam";
  double lr = 1e-3;
  double clip = 5.0;
  uint32_t epochs = 300;
  uint32_t batch = 1;
  uint32_t beam = 1;
  uint32_t max_len = 20;
  uint64_t seed = 7;
  uint32_t min_count = 1;
  std::string dims;
};

Lexicon open_lexicon(const Options& o) {
  attncap_lexicon* p = nullptr;
  check(attncap_lexicon_load(o.lexicon.empty() ? nullptr : o.lexicon.c_str(),
                             &p));
  return Lexicon(p);
}

Vocab open_vocab(const Options& o) {
  attncap_vocab* p = nullptr;
  check(attncap_vocab_load(o.vocab.c_str(), &p));
  return Vocab(p);
}

Model open_model(const Options& o) {
  attncap_model* p = nullptr;
  check(attncap_model_load(o.checkpoint.c_str(), &p));
  return Model(p);
}

fs::path out_dir(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) {
    throw Failure{ATTNCAP_E_IO,
                  "cannot create output directory " + o.out + ": " +
                      ec.message()};
  }
  return fs::path(o.out);
}

// Files are written whole through a temporary and renamed into place.
void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Failure{ATTNCAP_E_IO, "cannot write " + tmp.string()};
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Failure{ATTNCAP_E_IO, "cannot write " + path.string()};
}

// "LxDxExAxH"; 0 means "take from the data" for L and D.
attncap_dims parse_dims(const std::string& text) {
  attncap_dims d;
  attncap_dims_default(&d);
  d.regions = 0;
  d.feature_dim = 0;
  if (text.empty()) return d;
  std::vector<uint32_t> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      usage("--dims expects LxDxExAxH, got '" + text + "'");
    }
    v.push_back(static_cast<uint32_t>(std::stoul(part)));
  }
  if (v.size() != 5) usage("--dims expects LxDxExAxH, got '" + text + "'");
  // L or D of 0: take it from the data
  if (v[2] == 0 || v[3] == 0 || v[4] == 0) {
    usage("--dims E, A and H must be positive");
  }
  d = {v[0], v[1], v[2], v[3], v[4]};
  return d;
}

attncap_train_config train_config(const Options& o) {
  attncap_train_config c;
  attncap_train_config_default(&c);
  c.optimizer = o.optimizer.c_str();
  c.learning_rate = o.lr;
  c.clip = o.clip;
  c.epochs = o.epochs;
  c.batch_size = o.batch;
  c.seed = o.seed;
  return c;
}

std::string caption_text(const attncap_caption* cap, const attncap_vocab* v) {
  size_t need = 0;
  check(attncap_caption_text(cap, v, nullptr, 0, &need));
  std::string buf(need, '\0');
  check(attncap_caption_text(cap, v, buf.data(), buf.size(), &need));
  buf.resize(need - 1);
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---- sub-commands

int cmd_prepare(const Options& o) {
  Lexicon lex = open_lexicon(o);
  attncap_vocab* raw = nullptr;
  check(attncap_vocab_build(o.captions.c_str(), lex.get(), o.min_count, &raw));
  Vocab vocab(raw);
  const fs::path dir = out_dir(o);
  check(attncap_vocab_save(vocab.get(), (dir / "vocab.tsv").c_str()));
  check(attncap_encode_captions(o.captions.c_str(), lex.get(), vocab.get(),
                                (dir / "encoded.tsv").c_str()));
  std::cout << "vocab " << attncap_vocab_size(vocab.get()) << " entries -> "
            << (dir / "vocab.tsv").string() << "\n";
  return 0;
}

// Rows of an earlier log up to and including `last_epoch`.
std::string kept_log_rows(const fs::path& path, uint32_t last_epoch) {
  std::ifstream f(path);
  std::string line, kept;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    if (std::strtoul(line.substr(0, comma).c_str(), nullptr, 10) <= last_epoch) {
      kept += line + "\n";
    }
  }
  return kept;
}

int cmd_train(const Options& o) {
  Lexicon lex = open_lexicon(o);
  Vocab vocab = open_vocab(o);
  attncap_dataset* raw_ds = nullptr;
  check(attncap_dataset_load(o.captions.c_str(), o.features.c_str(), lex.get(),
                             vocab.get(), &raw_ds));
  Dataset ds(raw_ds);
  uint32_t regions = 0, feature_dim = 0, patch_pixels = 0;
  check(attncap_dataset_shape(ds.get(), &regions, &feature_dim, &patch_pixels));

  attncap_dims dims = parse_dims(o.dims);
  if (dims.regions != 0 && dims.regions != regions) {
    throw Failure{ATTNCAP_E_DIMENSION,
                  "--dims L=" + std::to_string(dims.regions) +
                      " but the data has " + std::to_string(regions) +
                      " regions"};
  }
  if (patch_pixels == 0) {
    if (dims.feature_dim != 0 && dims.feature_dim != feature_dim) {
      throw Failure{ATTNCAP_E_DIMENSION,
                    "--dims D=" + std::to_string(dims.feature_dim) +
                        " but the feature files have D=" +
                        std::to_string(feature_dim)};
    }
    dims.feature_dim = feature_dim;
  } else if (dims.feature_dim == 0) {
    attncap_dims d;
    attncap_dims_default(&d);
    dims.feature_dim = d.feature_dim;
  }
  dims.regions = regions;

  const attncap_train_config cfg = train_config(o);
  const fs::path dir = out_dir(o);
  const fs::path ckpt = dir / "model.ckpt";
  const fs::path log_path = dir / "train_log.csv";

  attncap_trainer* raw_tr = nullptr;
  std::string log = "epoch,mean_loss,seconds\n";
  if (!o.checkpoint.empty()) {
    check(attncap_trainer_resume(o.checkpoint.c_str(), &cfg, &raw_tr));
    const uint32_t done = attncap_trainer_epochs_done(raw_tr);
    if (fs::exists(log_path)) log += kept_log_rows(log_path, done);
  } else {
    attncap_model* raw_m = nullptr;
    check(attncap_model_create(&dims, static_cast<uint32_t>(
                                          attncap_vocab_size(vocab.get())),
                               patch_pixels, o.seed, &raw_m));
    Model m(raw_m);
    check(attncap_trainer_create(m.get(), &cfg, &raw_tr));
  }
  Trainer trainer(raw_tr);

  double loss = std::nan("");
  while (attncap_trainer_epochs_done(trainer.get()) < o.epochs) {
    uint32_t epoch = 0;
    double seconds = 0.0;
    check(attncap_trainer_run_epoch(trainer.get(), ds.get(), &epoch, &loss,
                                    &seconds));
    check(attncap_trainer_save(trainer.get(), ckpt.c_str()));
    log += std::to_string(epoch) + "," + format_double(loss) + "," +
           fixed6(seconds) + "\n";
    write_text(log_path, log);
  }
  if (std::isnan(loss)) {
    check(attncap_trainer_save(trainer.get(), ckpt.c_str()));
    write_text(log_path, log);
    std::cout << "nothing to do: checkpoint already at epoch "
              << attncap_trainer_epochs_done(trainer.get()) << "\n";
  } else {
    std::cout << "epoch " << attncap_trainer_epochs_done(trainer.get())
              << " loss " << format_double(loss) << " -> " << ckpt.string()
              << "\n";
  }
  return 0;
}

bool is_image_file(const fs::path& p) {
  return p.extension() == ".fgrd" || p.extension() == ".pgm";
}

std::vector<fs::path> image_files(const std::string& features) {
  std::vector<fs::path> files;
  if (fs::is_directory(features)) {
    for (const auto& e : fs::directory_iterator(features)) {
      if (e.is_regular_file() && is_image_file(e.path())) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw Failure{ATTNCAP_E_DATA, "no .fgrd or .pgm files in " + features};
    }
  } else {
    if (!fs::exists(features)) {
      throw Failure{ATTNCAP_E_IO, "no such file: " + features};
    }
    files.push_back(features);
  }
  return files;
}

Caption decode_file(const attncap_model* model, const fs::path& path,
                    const Options& o) {
  attncap_image* raw_img = nullptr;
  check(attncap_image_load(path.c_str(), &raw_img));
  Image img(raw_img);
  attncap_caption* raw_cap = nullptr;
  check(attncap_decode(model, img.get(), o.beam, o.max_len, &raw_cap));
  return Caption(raw_cap);
}

int cmd_caption(const Options& o) {
  Model model = open_model(o);
  Vocab vocab = open_vocab(o);
  const auto files = image_files(o.features);
  std::string lines;
  for (const fs::path& f : files) {
    Caption cap = decode_file(model.get(), f, o);
    nlohmann::ordered_json j;
    j["image_id"] = f.stem().string();
    j["caption"] = caption_text(cap.get(), vocab.get());
    j["logprob"] = attncap_caption_logprob(cap.get());
    lines += j.dump() + "\n";
  }
  const fs::path dir = out_dir(o);
  write_text(dir / "captions.jsonl", lines);
  std::cout << files.size() << " captions -> "
            << (dir / "captions.jsonl").string() << "\n";
  return 0;
}

int cmd_evaluate(const Options& o) {
  Model model = open_model(o);
  Vocab vocab = open_vocab(o);
  Lexicon lex = open_lexicon(o);
  const fs::path dir = out_dir(o);
  attncap_bleu b4{}, b1{};
  check(attncap_evaluate(model.get(), vocab.get(), lex.get(), o.captions.c_str(),
                         o.features.c_str(), o.beam, o.max_len,
                         (dir / "eval.json").c_str(), &b4, &b1));
  std::printf("BLEU-1 %.6f BLEU-4 %.6f (p1 %.4f p2 %.4f p3 %.4f p4 %.4f bp %.4f)\n",
              b1.score, b4.score, b4.precision[0], b4.precision[1],
              b4.precision[2], b4.precision[3], b4.brevity_penalty);
  return 0;
}

int cmd_grammar_train(const Options& o) {
  Lexicon lex = open_lexicon(o);
  uint32_t embed = 32, hidden = 32;
  if (!o.dims.empty()) {
    const attncap_dims d = parse_dims(o.dims);
    embed = d.embed;
    hidden = d.hidden;
  }
  const attncap_train_config cfg = train_config(o);
  std::string log = "epoch,mean_loss\n";
  auto on_epoch = [](uint32_t epoch, double loss, void* user) {
    *static_cast<std::string*>(user) +=
        std::to_string(epoch) + "," + format_double(loss) + "\n";
  };
  attncap_grammar* raw = nullptr;
  double acc = 0.0;
  check(attncap_grammar_train(o.captions.c_str(), lex.get(), &cfg, embed, hidden,
                              on_epoch, &log, &raw, &acc));
  Grammar g(raw);
  const fs::path dir = out_dir(o);
  check(attncap_grammar_save(g.get(), (dir / "grammar.ckpt").c_str(),
                             (dir / "grammar_vocab.tsv").c_str()));
  write_text(dir / "grammar_log.csv", log);
  std::printf("train accuracy %.4f -> %s\n", acc,
              (dir / "grammar.ckpt").c_str());
  return 0;
}

int cmd_attention(const Options& o) {
  Model model = open_model(o);
  Vocab vocab = open_vocab(o);
  const auto files = image_files(o.features);
  const fs::path dir = out_dir(o);
  for (const fs::path& f : files) {
    Caption cap = decode_file(model.get(), f, o);
    // one sub-directory per image when captioning a directory
    const fs::path target = files.size() == 1 ? dir : dir / f.stem();
    std::error_code ec;
    fs::create_directories(target, ec);
    size_t written = 0;
    check(attncap_caption_write_attention(cap.get(), 0, target.c_str(),
                                          &written));
    std::cout << f.stem().string() << ": " << caption_text(cap.get(), vocab.get())
              << " (" << written << " maps)\n";
  }
  return 0;
}

}  // namespace

namespace {

// key=value lines, '#' comments. Keys are long option names.
std::vector<std::pair<std::string, std::string>> read_config(
    const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Failure{ATTNCAP_E_IO, "cannot read config " + path};
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(f, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      usage(path + ":" + std::to_string(n) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

// Index of the --config value in argv, or 0.
std::size_t find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return i + 1;
    if (args[i].rfind("--config=", 0) == 0) return i;
  }
  return 0;
}

int exit_code(int status) {
  return status == ATTNCAP_E_USAGE || status == ATTNCAP_E_CONFIG ? 1 : 2;
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"attention-based Urdu image captioning"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(attncap_version()));

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory")->required();
    sub->add_option("--config", o.config, "key=value file; flags win");
    return sub;
  };
  auto seed = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "random seed")->envname("ATTNCAP_SEED");
  };
  auto decoding = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", o.checkpoint, "model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--vocab", o.vocab, "vocabulary file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--beam", o.beam, "beam width, 1 = greedy")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-len", o.max_len, "maximum caption length")
        ->check(CLI::PositiveNumber);
  };
  auto training = [&](CLI::App* sub) {
    sub->add_option("--optimizer", o.optimizer, "sgd_momentum, adam or rmsprop");
    sub->add_option("--lr", o.lr, "learning rate");
    sub->add_option("--clip", o.clip, "gradient clip threshold");
    sub->add_option("--epochs", o.epochs, "epochs");
    sub->add_option("--batch", o.batch, "batch size")->check(CLI::PositiveNumber);
    sub->add_option("--dims", o.dims, "LxDxExAxH");
    seed(sub);
  };

  CLI::App* prepare =
      common(app.add_subcommand("prepare", "build vocabulary and encoded dataset"));
  prepare->add_option("--captions", o.captions)->required()->check(CLI::ExistingFile);
  prepare->add_option("--lexicon", o.lexicon)->check(CLI::ExistingFile);
  prepare->add_option("--min-count", o.min_count, "drop rarer words to <unk>")
      ->check(CLI::PositiveNumber);

  CLI::App* train = common(app.add_subcommand("train", "train a caption model"));
  train->add_option("--captions", o.captions)->required()->check(CLI::ExistingFile);
  train->add_option("--features", o.features, "feature / image directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  train->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  train->add_option("--lexicon", o.lexicon)->check(CLI::ExistingFile);
  train->add_option("--checkpoint", o.checkpoint, "resume from this checkpoint")
      ->check(CLI::ExistingFile);
  training(train);

  CLI::App* caption =
      common(app.add_subcommand("caption", "caption a feature file or directory"));
  caption->add_option("--features", o.features)->required();
  decoding(caption);

  CLI::App* evaluate =
      common(app.add_subcommand("evaluate", "corpus BLEU against references"));
  evaluate->add_option("--captions", o.captions)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--features", o.features)
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--lexicon", o.lexicon)->check(CLI::ExistingFile);
  decoding(evaluate);

  CLI::App* grammar = common(
      app.add_subcommand("grammar-train", "train the grammar classifier"));
  grammar->add_option("--captions", o.captions, "labelled sentences")
      ->required()
      ->check(CLI::ExistingFile);
  grammar->add_option("--lexicon", o.lexicon)->check(CLI::ExistingFile);
  training(grammar);

  CLI::App* attention =
      common(app.add_subcommand("attention", "write attention heat maps"));
  attention->add_option("--features", o.features)->required();
  decoding(attention);

  // Config entries become flags placed before the user's own, so the later
  // (user) value wins.
  std::vector<std::string> args(argv, argv + argc);
  if (const std::size_t at = find_config(args); at != 0) {
    std::string path = args[at];
    if (path.rfind("--config=", 0) == 0) path = path.substr(9);
    std::size_t sub_at = 0;
    CLI::App* sub = nullptr;
    for (std::size_t i = 1; i < args.size() && !sub; ++i) {
      for (CLI::App* s : app.get_subcommands({})) {
        if (s->get_name() == args[i]) {
          sub = s;
          sub_at = i;
        }
      }
    }
    if (!sub) usage("--config needs a sub-command");
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(path)) {
      if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
        usage("unknown config key '" + key + "' for " + sub->get_name());
      }
      injected.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1,
                injected.begin(), injected.end());
  }
  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  if (*prepare) return cmd_prepare(o);
  if (*train) return cmd_train(o);
  if (*caption) return cmd_caption(o);
  if (*evaluate) return cmd_evaluate(o);
  if (*grammar) return cmd_grammar_train(o);
  return cmd_attention(o);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& c : msg) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::fprintf(stderr, "E%d: %s\n", f.code, msg.c_str());
    return exit_code(f.code);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "E%d: %s\n", ATTNCAP_E_INTERNAL, e.what());
    return 2;
  }
}
