#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "pgen/codec/codec.hpp"
#include "pgen/eval/bdrate.hpp"
#include "pgen/eval/psnr.hpp"
#include "pgen/io/csv.hpp"
#include "pgen/network/network.hpp"

namespace pgen {

struct Sequence {
  std::string cls;
  std::string name;
  std::vector<FrameY> frames;
};

// One (sequence, QP) cell; PSNRs are per-frame means.
struct ReportRow {
  std::string cls;
  std::string sequence;
  int qp = 0;
  double rate_bits = 0.0;
  double psnr_decoded = 0.0;
  double psnr_enhanced = 0.0;
  double delta_psnr = 0.0;
};

struct SequenceSummary {
  std::string cls;
  std::string sequence;
  std::optional<double> bd_rate;  // percent; needs at least 4 QPs
  double mean_delta_psnr = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<SequenceSummary> sequences;
  SequenceSummary average;
};

// BD-rate of the enhanced curve against the decoded one per sequence, plus
// an average row. Every sequence must have a row for every QP.
inline std::pair<std::vector<SequenceSummary>, SequenceSummary> summarize(const std::vector<ReportRow>& rows,
                                                                         const std::vector<int>& qps) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ReportRow*>> by_seq;
  for (const auto& r : rows) {
    if (!by_seq.count(r.sequence)) order.push_back(r.sequence);
    by_seq[r.sequence].push_back(&r);
  }
  std::vector<SequenceSummary> out;
  SequenceSummary avg{"", "Average", std::nullopt, 0.0};
  double bd_sum = 0.0;
  std::size_t bd_count = 0;
  for (const auto& name : order) {
    const auto& seq_rows = by_seq[name];
    RDCurve anchor, test;
    std::vector<double> deltas;
    for (int qp : qps) {
      const ReportRow* hit = nullptr;
      for (const ReportRow* r : seq_rows)
        if (r->qp == qp) hit = r;
      if (!hit) throw DataError("report: sequence '" + name + "' has no result for qp " + std::to_string(qp));
      anchor.points.push_back({hit->rate_bits, hit->psnr_decoded});
      test.points.push_back({hit->rate_bits, hit->psnr_enhanced});
      deltas.push_back(hit->delta_psnr);
    }
    SequenceSummary s{seq_rows.front()->cls, name, std::nullopt, mean_of(deltas)};
    if (qps.size() >= 4) {
      s.bd_rate = bd_rate(anchor, test);
      bd_sum += *s.bd_rate;
      ++bd_count;
    }
    avg.mean_delta_psnr += s.mean_delta_psnr;
    out.push_back(s);
  }
  if (!out.empty()) avg.mean_delta_psnr /= static_cast<double>(out.size());
  if (bd_count > 0) avg.bd_rate = bd_sum / static_cast<double>(bd_count);
  return {out, avg};
}

// Codes every frame at each QP, enhances the reconstruction with the model
// registered for that QP and records decoded/enhanced PSNR. The rate is the
// simulator's; post-processing adds no bits.
inline Report evaluate_model(const std::map<int, const Model<float>*>& models, const std::vector<Sequence>& sequences,
                             const CodecConfig& codec, const std::vector<int>& qps) {
  Report report;
  for (const Sequence& seq : sequences) {
    if (seq.frames.empty()) throw DataError("report: sequence '" + seq.name + "' has no frames");
    for (int qp : qps) {
      auto it = models.find(qp);
      if (it == models.end() || !it->second)
        throw DataError("report: no model for qp " + std::to_string(qp) + " (sequence '" + seq.name + "')");
      const Model<float>& model = *it->second;
      CodecConfig cfg = codec;
      cfg.qp = qp;
      std::vector<double> dec, enh, delta;
      double rate = 0.0;
      for (const FrameY& raw : seq.frames) {
        const FrameY frame = crop_to_multiple(raw, cfg.min_cu);
        const EncodeResult enc = encode_decode(frame, cfg);
        std::optional<Mask> mask;
        if (model.arch.uses_mask()) mask = make_mask(model.arch.mask_kind, enc.recon, enc.map);
        const FrameY out = enhance_frame(model, enc.recon, mask ? &*mask : nullptr);
        rate += enc.rd.rate;
        dec.push_back(enc.rd.psnr);
        enh.push_back(psnr(frame, out));
        delta.push_back(enh.back() - dec.back());
      }
      report.rows.push_back({seq.cls, seq.name, qp, rate, mean_of(dec), mean_of(enh), mean_of(delta)});
    }
  }
  std::tie(report.sequences, report.average) = summarize(report.rows, qps);
  return report;
}

inline Report evaluate_model(const Model<float>& model, const std::vector<Sequence>& sequences,
                             const CodecConfig& codec, const std::vector<int>& qps) {
  std::map<int, const Model<float>*> models;
  for (int qp : qps) models[qp] = &model;
  return evaluate_model(models, sequences, codec, qps);
}

// class,sequence,qp,psnr_decoded,psnr_enhanced,delta_psnr
inline void write_report_csv(std::ostream& out, const Report& r) {
  out << "class,sequence,qp,psnr_decoded,psnr_enhanced,delta_psnr\n";
  for (const auto& row : r.rows)
    out << row.cls << ',' << row.sequence << ',' << row.qp << ',' << io::fixed(row.psnr_decoded) << ','
        << io::fixed(row.psnr_enhanced) << ',' << io::fixed(row.delta_psnr) << '\n';
}

// class,sequence,bd_rate_pct,mean_delta_psnr with a closing Average row.
inline void write_bd_summary_csv(std::ostream& out, const Report& r) {
  out << "class,sequence,bd_rate_pct,mean_delta_psnr\n";
  const auto line = [&](const SequenceSummary& s) {
    out << s.cls << ',' << s.sequence << ',' << (s.bd_rate ? io::fixed(*s.bd_rate, 4) : std::string("n/a")) << ','
        << io::fixed(s.mean_delta_psnr) << '\n';
  };
  for (const auto& s : r.sequences) line(s);
  line(r.average);
}

inline void write_report_files(const std::string& report_path, const std::string& summary_path, const Report& r) {
  std::ofstream a(report_path);
  if (!a) throw DataError("cannot write '" + report_path + "'");
  write_report_csv(a, r);
  if (!summary_path.empty()) {
    std::ofstream b(summary_path);
    if (!b) throw DataError("cannot write '" + summary_path + "'");
    write_bd_summary_csv(b, r);
  }
}

}  // namespace pgen
