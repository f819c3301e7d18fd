// Copyright 2026 The Treefuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "treefuzz/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace treefuzz {

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

std::string StatsCsv(const CampaignStats &stats) {
  std::string out = kStatsCsvHeader;
  out += '\n';
  for (const StatsRow &r : stats.rows) {
    out += std::to_string(r.execs) + ',' + std::to_string(r.schedules) + ',' +
           std::to_string(r.coverage) + ',' + std::to_string(r.seeds) + ',' +
           std::to_string(r.crashes) + ',' + std::to_string(r.nodes_examined) +
           '\n';
  }
  return out;
}

void WriteStatsCsv(const CampaignStats &stats, const std::string &path) {
  WriteTextFile(path, StatsCsv(stats));
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

namespace {

struct RankedSamples {
  // Midranks of the pooled sample; the first n belong to `a`.
  std::vector<double> ranks;
  // Sum of t^3 - t over tie groups.
  double tie_term = 0;
};

RankedSamples RankPooled(std::span<const double> a, std::span<const double> b) {
  const size_t total = a.size() + b.size();
  std::vector<std::pair<double, size_t>> pooled;
  pooled.reserve(total);
  for (size_t i = 0; i < a.size(); ++i) pooled.push_back({a[i], i});
  for (size_t i = 0; i < b.size(); ++i) pooled.push_back({b[i], a.size() + i});
  std::sort(pooled.begin(), pooled.end());
  RankedSamples out;
  out.ranks.assign(total, 0);
  for (size_t i = 0; i < total;) {
    size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const double midrank = (static_cast<double>(i + 1 + j)) / 2.0;
    for (size_t t = i; t < j; ++t) out.ranks[pooled[t].second] = midrank;
    const double t = static_cast<double>(j - i);
    out.tie_term += t * t * t - t;
    i = j;
  }
  return out;
}

MannWhitneyResult Statistic(std::span<const double> a,
                            std::span<const double> b,
                            const RankedSamples &ranked) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("Mann-Whitney U needs two nonempty samples");
  }
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double rank_sum_a =
      std::accumulate(ranked.ranks.begin(), ranked.ranks.begin() + a.size(), 0.0);
  MannWhitneyResult r;
  r.u_a = rank_sum_a - n * (n + 1) / 2;
  r.u_b = n * m - r.u_a;
  return r;
}

}  // namespace

MannWhitneyResult MannWhitneyExact(std::span<const double> a,
                                   std::span<const double> b) {
  const RankedSamples ranked = RankPooled(a, b);
  MannWhitneyResult r = Statistic(a, b, ranked);
  r.exact = true;
  const size_t n = a.size();
  const size_t total = ranked.ranks.size();
  // Midranks are multiples of 1/2, so twice the rank sum is an integer.
  // ways[k][s] counts k-subsets of the items seen so far whose doubled rank
  // sum is s.
  const size_t max_sum = 2 * total * (total + 1) / 2;
  std::vector<std::vector<double>> ways(n + 1,
                                        std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1;
  for (size_t item = 0; item < total; ++item) {
    const size_t twice = static_cast<size_t>(std::llround(2 * ranked.ranks[item]));
    for (size_t k = std::min(n, item + 1); k >= 1; --k) {
      for (size_t s = max_sum; s >= twice; --s) {
        ways[k][s] += ways[k - 1][s - twice];
        if (s == twice) break;
      }
    }
  }
  const double nd = static_cast<double>(n);
  const double center = nd * static_cast<double>(b.size()) / 2;
  const double observed = std::abs(r.u_a - center);
  double extreme = 0, all = 0;
  for (size_t s = 0; s <= max_sum; ++s) {
    if (ways[n][s] == 0) continue;
    const double u = static_cast<double>(s) / 2 - nd * (nd + 1) / 2;
    all += ways[n][s];
    if (std::abs(u - center) >= observed - 1e-9) extreme += ways[n][s];
  }
  r.p_value = std::clamp(extreme / all, 0.0, 1.0);
  return r;
}

MannWhitneyResult MannWhitneyNormal(std::span<const double> a,
                                    std::span<const double> b) {
  const RankedSamples ranked = RankPooled(a, b);
  MannWhitneyResult r = Statistic(a, b, ranked);
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double total = n + m;
  const double mean = n * m / 2;
  double variance = n * m / 12 * (total + 1);
  if (total > 1) variance -= n * m * ranked.tie_term / (12 * total * (total - 1));
  if (variance <= 0) {
    r.p_value = 1;
    return r;
  }
  const double z =
      std::max(0.0, std::abs(r.u_a - mean) - 0.5) / std::sqrt(variance);
  r.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return r;
}

MannWhitneyResult MannWhitneyU(std::span<const double> a,
                               std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("Mann-Whitney U needs two nonempty samples");
  }
  if (a.size() + b.size() <= kExactMannWhitneyLimit) {
    return MannWhitneyExact(a, b);
  }
  return MannWhitneyNormal(a, b);
}

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2) return values[mid];
  return (values[mid - 1] + values[mid]) / 2;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<ComparisonResult> CompareRuns(std::span<const RunRecord> records) {
  std::vector<std::string> policies;
  // policy -> target -> records
  std::map<std::string, std::map<std::string, std::vector<const RunRecord *>>>
      grouped;
  std::set<std::string> labels;
  for (const RunRecord &r : records) {
    if (!labels.insert(r.label).second) {
      throw std::invalid_argument("duplicate run label '" + r.label + "'");
    }
    if (std::find(policies.begin(), policies.end(), r.policy) ==
        policies.end()) {
      policies.push_back(r.policy);
    }
    grouped[r.policy][r.target].push_back(&r);
  }
  if (policies.size() < 2) {
    throw std::invalid_argument("comparison needs at least two policies");
  }
  auto targets_of = [&](const std::string &policy) {
    std::vector<std::string> out;
    for (const auto &[target, runs] : grouped[policy]) out.push_back(target);
    return out;
  };
  const std::vector<std::string> targets = targets_of(policies.front());
  for (const std::string &p : policies) {
    if (targets_of(p) != targets) {
      throw std::invalid_argument("policy '" + p +
                                  "' was not run on the same targets as '" +
                                  policies.front() + "'");
    }
  }

  auto finals = [](const std::vector<const RunRecord *> &runs) {
    std::vector<double> out;
    for (const RunRecord *r : runs) {
      out.push_back(static_cast<double>(r->final_coverage));
    }
    return out;
  };
  auto crash_median = [](const std::vector<const RunRecord *> &runs)
      -> std::optional<double> {
    std::vector<double> times;
    for (const RunRecord *r : runs) {
      if (r->time_to_first_crash) {
        times.push_back(static_cast<double>(*r->time_to_first_crash));
      }
    }
    if (times.empty()) return std::nullopt;
    return Median(times);
  };

  std::vector<ComparisonResult> results;
  for (size_t i = 0; i < policies.size(); ++i) {
    for (size_t j = i + 1; j < policies.size(); ++j) {
      ComparisonResult cmp;
      cmp.policy_a = policies[i];
      cmp.policy_b = policies[j];
      std::vector<double> all_a, all_b;
      for (const std::string &target : targets) {
        const auto &runs_a = grouped[cmp.policy_a][target];
        const auto &runs_b = grouped[cmp.policy_b][target];
        const std::vector<double> a = finals(runs_a);
        const std::vector<double> b = finals(runs_b);
        all_a.insert(all_a.end(), a.begin(), a.end());
        all_b.insert(all_b.end(), b.begin(), b.end());
        TargetComparison t;
        t.target = target;
        t.median_a = Median(a);
        t.median_b = Median(b);
        if (t.median_a > t.median_b) {
          t.wins_a = 1;
        } else if (t.median_b > t.median_a) {
          t.wins_b = 1;
        } else {
          t.ties = 1;
        }
        t.p_value = MannWhitneyU(a, b).p_value;
        const auto crash_a = crash_median(runs_a);
        const auto crash_b = crash_median(runs_b);
        if (crash_a && crash_b) {
          t.first_crash_ratio =
              *crash_b == 0 ? (*crash_a == 0 ? 1.0 : kInfiniteScore)
                            : *crash_a / *crash_b;
        }
        cmp.wins_a += t.wins_a;
        cmp.wins_b += t.wins_b;
        cmp.ties += t.ties;
        cmp.targets.push_back(std::move(t));
      }
      cmp.median_a = Median(all_a);
      cmp.median_b = Median(all_b);
      cmp.p_value = MannWhitneyU(all_a, all_b).p_value;
      results.push_back(std::move(cmp));
    }
  }
  return results;
}

namespace {

std::string FormatReal(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string FormatFixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string EscapeXml(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string ComparisonCsv(std::span<const ComparisonResult> results) {
  std::string out =
      "policy_a,policy_b,target,median_a,median_b,wins_a,wins_b,ties,p_value\n";
  for (const ComparisonResult &cmp : results) {
    for (const TargetComparison &t : cmp.targets) {
      out += cmp.policy_a + ',' + cmp.policy_b + ',' + t.target + ',' +
             FormatReal(t.median_a) + ',' + FormatReal(t.median_b) + ',' +
             std::to_string(t.wins_a) + ',' + std::to_string(t.wins_b) + ',' +
             std::to_string(t.ties) + ',' + FormatReal(t.p_value) + '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

std::string CoveragePlotSvg(std::span<const PlotSeries> series) {
  if (series.empty()) throw std::invalid_argument("plot needs a series");
  constexpr double kWidth = 800, kHeight = 500;
  constexpr double kLeft = 70, kRight = 180, kTop = 30, kBottom = 60;
  constexpr const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#ff7f0e", "#9467bd", "#8c564b",
                                     "#e377c2", "#7f7f7f"};
  double max_x = 0, max_y = 0;
  for (const PlotSeries &s : series) {
    for (auto [x, y] : s.points) {
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x <= 0) max_x = 1;
  if (max_y <= 0) max_y = 1;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + x / max_x * plot_w; };
  auto sy = [&](double y) { return kTop + plot_h - y / max_y * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes.
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">executions</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">coverage</text>\n";
  // Tick labels at the origin and the maxima.
  svg << "<text x=\"" << kLeft << "\" y=\"" << kTop + plot_h + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">0</text>\n";
  svg << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kTop + plot_h + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << FormatReal(max_x) << "</text>\n";
  svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + plot_h
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">0</text>\n";
  svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << FormatReal(max_y) << "</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const char *color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (size_t p = 0; p < series[i].points.size(); ++p) {
      if (p) svg << ' ';
      svg << FormatFixed(sx(series[i].points[p].first)) << ','
          << FormatFixed(sy(series[i].points[p].second));
    }
    svg << "\"/>\n";
    const double ly = kTop + 10 + 20 * static_cast<double>(i);
    const double lx = kLeft + plot_w + 15;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 25
        << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << EscapeXml(series[i].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void EmitCoveragePlot(std::span<const PlotSeries> series,
                      const std::string &path) {
  WriteTextFile(path, CoveragePlotSvg(series));
}

}  // namespace treefuzz
