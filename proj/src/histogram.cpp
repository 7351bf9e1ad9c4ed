#include "qdpillar/histogram.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "qdpillar/error.hpp"

namespace qdpillar {

Histogram Histogram::centered(double span, double bin_width) {
  if (!(bin_width > 0.0)) raise(ErrorKind::InvalidParameter, "bin_width must be > 0");
  if (!(span >= 0.0)) raise(ErrorKind::InvalidParameter, "span must be >= 0");
  const auto half = static_cast<std::size_t>(std::ceil(span / bin_width - 0.5));
  Histogram h;
  h.bin_width = bin_width;
  h.t_min = -(static_cast<double>(half) + 0.5) * bin_width;
  h.counts.assign(2 * half + 1, 0);
  return h;
}

Histogram Histogram::uniform(double t_min, double bin_width, std::size_t bins) {
  if (!(bin_width > 0.0)) raise(ErrorKind::InvalidParameter, "bin_width must be > 0");
  if (bins == 0) raise(ErrorKind::InvalidParameter, "histogram needs at least one bin");
  Histogram h;
  h.bin_width = bin_width;
  h.t_min = t_min;
  h.counts.assign(bins, 0);
  return h;
}

std::optional<std::size_t> Histogram::bin_of(double t) const noexcept {
  const double x = std::floor((t - t_min) / bin_width);
  if (!(x >= 0.0) || x >= static_cast<double>(counts.size())) return std::nullopt;
  return static_cast<std::size_t>(x);
}

bool Histogram::add(double t, std::int64_t weight) noexcept {
  const auto bin = bin_of(t);
  if (!bin) return false;
  counts[*bin] += weight;
  return true;
}

std::int64_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t Histogram::window_sum(double center, double half_window) const noexcept {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = bin_center(i);
    if (c >= center - half_window && c < center + half_window) sum += counts[i];
  }
  return sum;
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (other.counts.size() != counts.size() || other.bin_width != bin_width ||
      other.t_min != t_min)
    raise(ErrorKind::InvalidParameter, "cannot merge histograms with different binning");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

void Histogram::validate() const {
  if (!(bin_width > 0.0)) raise(ErrorKind::InvalidParameter, "histogram bin_width must be > 0");
  if (counts.empty()) raise(ErrorKind::InvalidParameter, "histogram has no bins");
  for (auto c : counts)
    if (c < 0) raise(ErrorKind::InvalidParameter, "histogram counts must be nonnegative");
}

bool operator==(const Histogram& a, const Histogram& b) {
  return a.bin_width == b.bin_width && a.t_min == b.t_min && a.counts == b.counts;
}

void write_histogram_csv(std::ostream& out, const Histogram& h, std::uint64_t seed) {
  out << std::setprecision(17);
  out << "# bin_width=" << h.bin_width << " t_min=" << h.t_min << " seed=" << seed << '\n';
  out << "tau_seconds,counts\n";
  for (std::size_t i = 0; i < h.size(); ++i) out << h.bin_center(i) << ',' << h.counts[i] << '\n';
}

HistogramFile read_histogram_csv(std::istream& in) {
  HistogramFile file;
  std::string line;
  bool have_width = false;
  bool have_tmin = false;
  std::size_t line_no = 0;
  std::vector<double> centers;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string token;
      while (fields >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
          if (key == "bin_width") {
            file.histogram.bin_width = std::stod(value);
            have_width = true;
          } else if (key == "t_min") {
            file.histogram.t_min = std::stod(value);
            have_tmin = true;
          } else if (key == "seed") {
            file.seed = std::stoull(value);
          }
        } catch (const std::exception&) {
          raise(ErrorKind::Parse, "histogram csv line " + std::to_string(line_no) +
                                      ": bad value for " + key);
        }
      }
      continue;
    }
    if (line.rfind("tau_seconds", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      raise(ErrorKind::Parse, "histogram csv line " + std::to_string(line_no) + ": expected 2 columns");
    try {
      centers.push_back(std::stod(line.substr(0, comma)));
      file.histogram.counts.push_back(std::stoll(line.substr(comma + 1)));
    } catch (const std::exception&) {
      raise(ErrorKind::Parse, "histogram csv line " + std::to_string(line_no) + ": not numeric");
    }
  }
  if (file.histogram.counts.empty()) raise(ErrorKind::Parse, "histogram csv has no rows");
  if (!have_width) {
    if (centers.size() < 2) raise(ErrorKind::Parse, "histogram csv lacks bin_width");
    file.histogram.bin_width = centers[1] - centers[0];
  }
  if (!have_tmin) file.histogram.t_min = centers.front() - 0.5 * file.histogram.bin_width;
  file.histogram.validate();
  return file;
}

}  // namespace qdpillar
