#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgen/eval/bdrate.hpp"
#include "pgen/eval/report.hpp"
#include "pgen/io/checkpoint.hpp"
#include "pgen/io/csv.hpp"
#include "pgen/io/manifest.hpp"
#include "pgen/io/patch_store.hpp"
#include "pgen/io/pgm.hpp"
#include "pgen/io/pmap.hpp"
#include "pgen/io/yuv.hpp"
#include "pgen/synth.hpp"
#include "pgen/training/trainer.hpp"

namespace pgen {

namespace cli {

inline bool is_pgm(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm";
}

// A frame source: PGM (dimensions from the header) or raw YUV 4:2:0.
struct FrameSource {
  std::string path;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t frame = 0;

  void add_options(CLI::App* app, const std::string& flag = "--input") {
    app->add_option(flag, path, "input frame (.yuv or .pgm)")->required();
    app->add_option("--width", width, "YUV width");
    app->add_option("--height", height, "YUV height");
    app->add_option("--frame", frame, "YUV frame index");
  }

  FrameY read(std::size_t min_cu) const {
    if (is_pgm(path)) {
      FrameY f = io::read_pgm(path);
      return min_cu > 0 ? crop_to_multiple(f, min_cu) : f;
    }
    if (width == 0 || height == 0) throw UsageError("'" + path + "' is raw YUV: --width and --height are required");
    return io::read_yuv_frame(path, width, height, frame, min_cu);
  }
};

inline void write_frame(const std::string& path, const FrameY& f) {
  if (is_pgm(path)) io::write_pgm(path, f);
  else io::write_yuv_frame(path, f);
}

inline std::string with_qp(const std::string& pattern, int qp, bool multi) {
  const auto at = pattern.find("{qp}");
  if (at == std::string::npos) {
    if (multi) throw UsageError("output path '" + pattern + "' needs a {qp} placeholder when several QPs are given");
    return pattern;
  }
  return pattern.substr(0, at) + std::to_string(qp) + pattern.substr(at + 4);
}

struct CodecFlags {
  std::size_t ctu = 64;
  std::size_t min_cu = 8;
  double lambda_scale = 0.85;

  void add_options(CLI::App* app) {
    app->add_option("--ctu", ctu, "CTU size");
    app->add_option("--min-cu", min_cu, "minimum CU size");
    app->add_option("--lambda-scale", lambda_scale, "RD lambda scale");
  }

  CodecConfig config(int qp) const {
    CodecConfig c{ctu, min_cu, qp, lambda_scale};
    validate(c);
    return c;
  }
};

struct TrainFlags {
  int qp = 37;
  std::string arch = "af";
  std::string mask_kind = "mean";
  int epochs = 40;
  std::size_t batch = 32;
  double lr = 1e-4;
  int lr_decay_epoch = 20;
  double lr_decay_factor = 0.1;
  std::uint64_t seed = 0;
  std::string init;
  std::size_t res_blocks = 2;
  std::size_t channels = 64;
  bool no_global_skip = false;
  std::string data;
  std::string out;
  std::string log;

  void add_common(CLI::App* app) {
    app->add_option("--data", data, "patch store from `dataset`")->required();
    app->add_option("--qp", qp, "QP the model is trained for");
    app->add_option("--epochs", epochs, "epochs");
    app->add_option("--batch", batch, "mini-batch size");
    app->add_option("--lr", lr, "initial learning rate");
    app->add_option("--lr-decay-epoch", lr_decay_epoch, "last epoch at the initial rate");
    app->add_option("--lr-decay-factor", lr_decay_factor, "learning-rate multiplier after the decay epoch");
    app->add_option("--seed", seed, "seed");
    app->add_option("--out", out, "output checkpoint")->required();
    app->add_option("--log", log, "append per-epoch CSV log here");
  }

  void add_arch(CLI::App* app) {
    app->add_option("--arch", arch, "single | af | cf | ef");
    app->add_option("--mask-kind", mask_kind, "mean | boundary");
    app->add_option("--res-blocks", res_blocks, "residual blocks per stream");
    app->add_option("--channels", channels, "feature channels");
    app->add_flag("--no-global-skip", no_global_skip, "predict the frame directly instead of a residual");
  }

  ArchConfig arch_config() const {
    ArchConfig a;
    a.variant = parse_variant(arch);
    a.mask_kind = parse_mask_kind(mask_kind);
    a.num_res_blocks = res_blocks;
    a.channels = channels;
    a.global_skip = !no_global_skip;
    validate(a);
    return a;
  }

  TrainConfig config(const ArchConfig& a) const {
    TrainConfig c;
    c.qp = qp;
    c.batch_size = batch;
    c.lr_initial = lr;
    c.lr_decay_epoch = lr_decay_epoch;
    c.lr_decay_factor = lr_decay_factor;
    c.epochs = epochs;
    c.seed = seed;
    if (!init.empty()) c.init_checkpoint = init;
    c.arch = a;
    validate(c);
    return c;
  }
};

inline Dataset load_training_data(const TrainFlags& f) {
  Dataset ds = io::load_dataset(f.data);
  if (ds.qp != f.qp)
    throw UsageError("patch store '" + f.data + "' was coded at qp " + std::to_string(ds.qp) + ", not " +
                     std::to_string(f.qp));
  return ds;
}

inline void run_training(const TrainFlags& f, const TrainConfig& config, const Dataset& ds, const Model<float>* init,
                         std::ostream& out) {
  const auto report = [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << " loss " << io::fixed(r.mean_loss, 9) << " lr " << r.lr << '\n';
    if (!f.log.empty()) append_training_log(f.log, r);
  };
  const TrainResult result = train(config, ds, init, report);
  io::save_checkpoint(f.out, result.model);
  out << "saved " << f.out << " (" << result.model.parameter_count() << " parameters)\n";
}

inline std::vector<Sequence> load_sequences(const io::DatasetManifest& m, std::size_t max_frames, std::size_t min_cu) {
  std::vector<Sequence> seqs;
  for (const auto& e : m.entries) {
    io::check_entry(m, e);
    Sequence s;
    s.cls = e.cls;
    s.name = e.name.empty() ? std::filesystem::path(e.path).stem().string() : e.name;
    const std::size_t n = max_frames == 0 ? e.frame_count : std::min(max_frames, e.frame_count);
    for (std::size_t i = 0; i < n; ++i) s.frames.push_back(io::read_yuv_frame(m.resolve(e), e.width, e.height, i, min_cu));
    seqs.push_back(std::move(s));
  }
  return seqs;
}

}  // namespace cli

// Exit codes: 0 success, 1 usage/configuration error, 2 data error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli;
  CLI::App app{"Partition-aware post-processing for block-coded video"};
  app.name("pgen");
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (1 = deterministic)")->check(CLI::PositiveNumber);

  // encode
  auto* encode = app.add_subcommand("encode", "code a frame; write recon, partition map and RD stats");
  FrameSource enc_src;
  enc_src.add_options(encode);
  std::vector<int> enc_qps{37};
  CodecFlags enc_codec;
  std::string enc_recon, enc_map, enc_rd;
  encode->add_option("--qp", enc_qps, "QP (repeatable)");
  enc_codec.add_options(encode);
  encode->add_option("--recon", enc_recon, "reconstruction (.yuv/.pgm; {qp} expands)");
  encode->add_option("--map", enc_map, "partition map (.pmap; {qp} expands)");
  encode->add_option("--rd-csv", enc_rd, "RD points as qp,rate_bits,psnr_db");

  // mask
  auto* mask = app.add_subcommand("mask", "derive a partition mask");
  FrameSource mask_src;
  mask_src.add_options(mask);
  std::string mask_map, mask_kind = "mean", mask_out;
  mask->add_option("--partition", mask_map, "partition map")->required();
  mask->add_option("--kind", mask_kind, "mean | boundary");
  mask->add_option("--out", mask_out, "PGM output")->required();

  // dataset
  auto* dataset = app.add_subcommand("dataset", "manifest -> patch store");
  std::string ds_manifest, ds_out, ds_holdout_manifest, ds_mask_kind = "mean";
  int ds_qp = 37;
  std::size_t ds_frames = 3;
  std::uint64_t ds_seed = 0;
  double ds_holdout = 0.0;
  bool ds_no_masks = false;
  CodecFlags ds_codec;
  dataset->add_option("--manifest", ds_manifest, "dataset manifest (JSON)")->required();
  dataset->add_option("--qp", ds_qp, "coding QP");
  dataset->add_option("--mask-kind", ds_mask_kind, "mean | boundary");
  dataset->add_flag("--no-masks", ds_no_masks, "skip masks (SINGLE training only)");
  dataset->add_option("--frames-per-clip", ds_frames, "frames sampled per clip");
  dataset->add_option("--seed", ds_seed, "seed");
  dataset->add_option("--holdout", ds_holdout, "fraction of clips held out");
  dataset->add_option("--holdout-manifest", ds_holdout_manifest, "write held-out clips here");
  dataset->add_option("--out", ds_out, "patch store")->required();
  ds_codec.add_options(dataset);

  // train
  auto* trainc = app.add_subcommand("train", "train a model from scratch or from --init");
  TrainFlags tr;
  tr.add_common(trainc);
  tr.add_arch(trainc);
  trainc->add_option("--init", tr.init, "initial checkpoint");

  // finetune
  auto* fine = app.add_subcommand("finetune", "continue training a checkpoint at another QP");
  TrainFlags ft;
  std::string ft_base;
  ft.add_common(fine);
  ft.epochs = 10;
  ft.lr_decay_epoch = 5;
  fine->add_option("--base", ft_base, "checkpoint to start from")->required();

  // init-model
  auto* initm = app.add_subcommand("init-model", "write a freshly initialized checkpoint");
  TrainFlags im;
  bool im_identity = false;
  std::string im_out;
  im.add_arch(initm);
  initm->add_option("--seed", im.seed, "seed");
  initm->add_flag("--identity", im_identity, "zero the reconstruction layer (output = input)");
  initm->add_option("--out", im_out, "checkpoint")->required();

  // enhance
  auto* enhance = app.add_subcommand("enhance", "post-process a decoded frame");
  FrameSource enh_src;
  enh_src.add_options(enhance);
  std::string enh_model, enh_map, enh_out;
  enhance->add_option("--model", enh_model, "checkpoint")->required();
  enhance->add_option("--partition", enh_map, "partition map (mask variants)");
  enhance->add_option("--out", enh_out, "output frame (.yuv/.pgm)")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "quality evaluation");
  eval->require_subcommand(1);
  auto* eval_psnr = eval->add_subcommand("psnr", "PSNR between two frames");
  FrameSource ps_a, ps_b;
  ps_a.add_options(eval_psnr, "--ref");
  eval_psnr->add_option("--test", ps_b.path, "test frame")->required();
  auto* eval_report = eval->add_subcommand("report", "per-sequence PSNR and BD-rate report");
  std::string rep_manifest, rep_model, rep_out, rep_summary;
  std::vector<std::string> rep_model_qp;
  std::vector<int> rep_qps{22, 27, 32, 37};
  std::size_t rep_frames = 0;
  CodecFlags rep_codec;
  eval_report->add_option("--manifest", rep_manifest, "sequences")->required();
  eval_report->add_option("--model", rep_model, "checkpoint used for every QP");
  eval_report->add_option("--model-qp", rep_model_qp, "QP=checkpoint (repeatable)");
  eval_report->add_option("--qp", rep_qps, "QPs");
  eval_report->add_option("--frames", rep_frames, "frames per sequence (0 = all)");
  eval_report->add_option("--out", rep_out, "report CSV")->required();
  eval_report->add_option("--summary", rep_summary, "BD-rate summary CSV");
  rep_codec.add_options(eval_report);

  // bdrate
  auto* bdrate = app.add_subcommand("bdrate", "BD-rate of test vs anchor RD curves");
  std::string bd_anchor, bd_test;
  bdrate->add_option("anchor", bd_anchor, "anchor RD CSV")->required();
  bdrate->add_option("test", bd_test, "test RD CSV")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "write a procedural YUV corpus and manifest");
  std::string sy_dir;
  std::size_t sy_clips = 4, sy_w = 256, sy_h = 256, sy_frames = 3;
  std::uint64_t sy_seed = 1;
  synth->add_option("--out", sy_dir, "output directory")->required();
  synth->add_option("--clips", sy_clips, "clip count");
  synth->add_option("--width", sy_w, "width");
  synth->add_option("--height", sy_h, "height");
  synth->add_option("--frames", sy_frames, "frames per clip");
  synth->add_option("--seed", sy_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    set_thread_count(threads);

    if (*encode) {
      const FrameY frame = enc_src.read(enc_codec.min_cu);
      const bool multi = enc_qps.size() > 1;
      std::vector<io::RDRow> rows;
      for (int qp : enc_qps) {
        const CodecConfig cfg = enc_codec.config(qp);
        const EncodeResult r = encode_decode(frame, cfg);
        if (!enc_recon.empty()) write_frame(with_qp(enc_recon, qp, multi), r.recon);
        if (!enc_map.empty()) io::write_partition_map(with_qp(enc_map, qp, multi), r.map);
        rows.push_back({qp, r.rd});
        out << "qp " << qp << " rate_bits " << static_cast<long long>(r.rd.rate) << " psnr_db " << io::fixed(r.rd.psnr, 4)
            << " leaves " << r.map.leaves.size() << '\n';
      }
      if (!enc_rd.empty()) io::write_rd_csv(enc_rd, rows);
    } else if (*mask) {
      const FrameY recon = mask_src.read(0);
      const PartitionMap map = io::read_partition_map(mask_map);
      io::write_mask_pgm(mask_out, make_mask(parse_mask_kind(mask_kind), recon, map));
    } else if (*dataset) {
      if (!(ds_holdout >= 0.0 && ds_holdout < 1.0)) throw UsageError("--holdout must lie in [0, 1)");
      const io::DatasetManifest manifest = io::load_manifest(ds_manifest);
      auto [train_part, held_part] = split_clips(manifest, ds_holdout, ds_seed);
      DatasetOptions opt;
      opt.codec = ds_codec.config(ds_qp);
      opt.mask_kind = parse_mask_kind(ds_mask_kind);
      opt.with_masks = !ds_no_masks;
      opt.frames_per_clip = ds_frames;
      opt.seed = ds_seed;
      const Dataset ds = build_dataset(train_part, opt);
      for (const auto& f : ds.failures) err << "warning: skipped " << f << '\n';
      if (ds.patches.empty()) throw DataError("no patches could be extracted from '" + ds_manifest + "'");
      io::save_dataset(ds_out, ds);
      if (!ds_holdout_manifest.empty()) {
        held_part.base_dir = manifest.base_dir;
        io::save_manifest(ds_holdout_manifest, held_part);
      }
      out << "patches " << ds.patches.size() << " train_clips " << train_part.entries.size() << " heldout_clips "
          << held_part.entries.size() << '\n';
    } else if (*trainc) {
      const TrainConfig config = tr.config(tr.arch_config());
      run_training(tr, config, load_training_data(tr), nullptr, out);
    } else if (*fine) {
      const Model<float> base = io::load_checkpoint(ft_base);
      const TrainConfig config = ft.config(base.arch);
      run_training(ft, config, load_training_data(ft), &base, out);
    } else if (*initm) {
      Model<float> m = build_model<float>(im.arch_config(), im.seed);
      if (im_identity) make_identity(m);
      io::save_checkpoint(im_out, m);
    } else if (*enhance) {
      const Model<float> model = io::load_checkpoint(enh_model);
      const FrameY decoded = enh_src.read(0);
      std::optional<Mask> m;
      if (model.arch.uses_mask()) {
        if (enh_map.empty())
          throw UsageError(std::string("variant ") + to_string(model.arch.variant) + " needs --partition");
        m = make_mask(model.arch.mask_kind, decoded, io::read_partition_map(enh_map));
      }
      write_frame(enh_out, enhance_frame(model, decoded, m ? &*m : nullptr));
    } else if (*eval_psnr) {
      ps_b.width = ps_a.width;
      ps_b.height = ps_a.height;
      ps_b.frame = ps_a.frame;
      out << "psnr_db " << io::fixed(psnr(ps_a.read(0), ps_b.read(0)), 6) << '\n';
    } else if (*eval_report) {
      std::vector<std::unique_ptr<Model<float>>> owned;
      std::map<int, const Model<float>*> models;
      if (!rep_model.empty()) {
        owned.push_back(std::make_unique<Model<float>>(io::load_checkpoint(rep_model)));
        for (int qp : rep_qps) models[qp] = owned.back().get();
      }
      for (const auto& spec : rep_model_qp) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw UsageError("--model-qp expects QP=checkpoint, got '" + spec + "'");
        int qp = 0;
        try {
          qp = std::stoi(spec.substr(0, eq));
        } catch (const std::exception&) {
          throw UsageError("--model-qp: bad QP in '" + spec + "'");
        }
        owned.push_back(std::make_unique<Model<float>>(io::load_checkpoint(spec.substr(eq + 1))));
        models[qp] = owned.back().get();
      }
      if (models.empty()) throw UsageError("eval report needs --model or --model-qp");
      const io::DatasetManifest manifest = io::load_manifest(rep_manifest);
      const Report r = evaluate_model(models, load_sequences(manifest, rep_frames, rep_codec.min_cu),
                                      rep_codec.config(rep_qps.front()), rep_qps);
      write_report_files(rep_out, rep_summary, r);
      out << "rows " << r.rows.size() << " mean_delta_psnr " << io::fixed(r.average.mean_delta_psnr, 4);
      if (r.average.bd_rate) out << " bd_rate " << io::fixed(*r.average.bd_rate, 2) << '%';
      out << '\n';
    } else if (*bdrate) {
      const auto curve = [](const std::vector<io::RDRow>& rows) {
        RDCurve c;
        for (const auto& r : rows) c.points.push_back(r.point);
        return c;
      };
      double bd = bd_rate(curve(io::read_rd_csv(bd_anchor)), curve(io::read_rd_csv(bd_test)));
      if (std::abs(bd) < 0.005) bd = 0.0;  // avoid printing -0.00%
      out << "BD-rate " << io::fixed(bd, 2) << "%\n";
    } else if (*synth) {
      const auto m = write_synthetic_corpus(sy_dir, sy_clips, sy_w, sy_h, sy_frames, sy_seed);
      out << "wrote " << m.entries.size() << " clips to " << sy_dir << '\n';
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace pgen
