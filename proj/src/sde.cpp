#include "sde.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "io.hpp"

namespace yyf {

SimulatedPaths simulate(const FilterModel& model, const TimeSchedule& schedule, std::size_t substeps,
                        std::uint64_t seed, std::uint64_t path_index) {
  require(substeps >= 1, "substeps must be >= 1");
  const std::size_t d = model.dimension();
  const std::size_t n = model.observation_dimension();
  const std::size_t K = schedule.steps();
  const double dt = schedule.delta() / static_cast<double>(substeps);
  const double sqrt_dt = std::sqrt(dt);

  SimulatedPaths out{{schedule, d, std::vector<double>((K + 1) * d)},
                     {schedule, n, std::vector<double>((K + 1) * n, 0.0)}};

  std::vector<double> x(d), y(n, 0.0), f(d), g(d * d), h(n), noise(d);
  model.sample_initial(CounterRng(seed, path_index, Stream::initial), x);
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(x[i])) fail(ErrorCode::numerical, "initial state is not finite");
    out.state.values[i] = x[i];
  }

  const CounterRng state_rng(seed, path_index, Stream::state_noise);
  const CounterRng obs_rng(seed, path_index, Stream::observation_noise);
  std::uint64_t step = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    for (std::size_t s = 0; s < substeps; ++s, ++step) {
      model.drift(x, f);
      model.diffusion(x, g);
      model.observation(x, h);
      for (std::size_t i = 0; i < d; ++i) noise[i] = sqrt_dt * state_rng.normal(step * d + i);
      for (std::size_t j = 0; j < n; ++j) y[j] += h[j] * dt + sqrt_dt * obs_rng.normal(step * n + j);
      for (std::size_t i = 0; i < d; ++i) {
        double gi = 0.0;
        for (std::size_t j = 0; j < d; ++j) gi += g[i * d + j] * noise[j];
        x[i] += f[i] * dt + gi;
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(x[i]))
        fail(ErrorCode::numerical, "state became non-finite before knot " + std::to_string(k));
      out.state.values[k * d + i] = x[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(y[j]))
        fail(ErrorCode::numerical, "observation became non-finite before knot " + std::to_string(k));
      out.observation.values[k * n + j] = y[j];
    }
  }
  return out;
}

std::vector<double> observation_increments(const ObservationPath& path) {
  const std::size_t n = path.dimension;
  const std::size_t K = path.schedule.steps();
  std::vector<double> inc(K * n);
  for (std::size_t k = 1; k <= K; ++k)
    for (std::size_t j = 0; j < n; ++j)
      inc[(k - 1) * n + j] = path.values[k * n + j] - path.values[(k - 1) * n + j];
  return inc;
}

namespace {

template <typename Path>
Path subsample_impl(const Path& path, std::size_t stride) {
  const std::size_t K = path.schedule.steps();
  require(stride >= 1 && K % stride == 0, "subsample stride must divide the number of steps");
  Path out{TimeSchedule(path.schedule.terminal(), K / stride), path.dimension, {}};
  out.values.reserve((K / stride + 1) * path.dimension);
  for (std::size_t k = 0; k <= K; k += stride) {
    auto row = path.at(k);
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

ObservationPath subsample(const ObservationPath& path, std::size_t stride) {
  return subsample_impl(path, stride);
}
StatePath subsample(const StatePath& path, std::size_t stride) { return subsample_impl(path, stride); }

void write_paths_csv(std::ostream& os, const SimulatedPaths& paths, const std::string& comment) {
  write_comment(os, comment);
  os << 't';
  for (std::size_t i = 1; i <= paths.state.dimension; ++i) os << ",X_" << i;
  for (std::size_t j = 1; j <= paths.observation.dimension; ++j) os << ",Y_" << j;
  os << '\n';
  const auto& schedule = paths.state.schedule;
  for (std::size_t k = 0; k <= schedule.steps(); ++k) {
    os << format_double(schedule.knot(k));
    for (double v : paths.state.at(k)) os << ',' << format_double(v);
    for (double v : paths.observation.at(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_paths_csv(const std::string& file, const SimulatedPaths& paths, const std::string& comment) {
  auto os = open_output(file);
  write_paths_csv(os, paths, comment);
}

SimulatedPaths read_paths_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) header.push_back(col);
    break;
  }
  if (header.empty() || header[0] != "t") fail(ErrorCode::parse, "path CSV: missing header row");
  std::size_t d = 0, n = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].starts_with("X_")) {
      if (n > 0) fail(ErrorCode::parse, "path CSV: X columns must precede Y columns");
      ++d;
    } else if (header[c].starts_with("Y_")) {
      ++n;
    } else {
      fail(ErrorCode::parse, "path CSV: unexpected column '" + header[c] + "'");
    }
  }
  std::vector<double> t, xs, ys;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorCode::parse, "path CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != 1 + d + n)
      fail(ErrorCode::parse, "path CSV line " + std::to_string(line_no) + ": wrong column count");
    t.push_back(row[0]);
    xs.insert(xs.end(), row.begin() + 1, row.begin() + 1 + static_cast<long>(d));
    ys.insert(ys.end(), row.begin() + 1 + static_cast<long>(d), row.end());
  }
  if (t.size() < 2) fail(ErrorCode::parse, "path CSV: need at least two knots");
  const TimeSchedule schedule(t.back(), t.size() - 1);
  return {{schedule, d, std::move(xs)}, {schedule, n, std::move(ys)}};
}

namespace {

constexpr char kMagic[8] = {'Y', 'Y', 'P', 'A', 'T', 'H', '1', '\0'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) fail(ErrorCode::parse, "path cache: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_paths_binary(const std::string& file, const SimulatedPaths& paths) {
  auto os = open_output(file, true);
  os.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(paths.state.dimension));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(paths.observation.dimension));
  put_le<std::uint64_t>(os, paths.state.schedule.steps());
  put_le<double>(os, paths.state.schedule.terminal());
  for (double v : paths.state.values) put_le(os, v);
  for (double v : paths.observation.values) put_le(os, v);
  if (!os) fail(ErrorCode::io, "failed writing '" + file + "'");
}

SimulatedPaths read_paths_binary(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open '" + file + "'");
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    fail(ErrorCode::parse, "'" + file + "' is not a YYPATH1 cache");
  const auto d = get_le<std::uint32_t>(is);
  const auto n = get_le<std::uint32_t>(is);
  const auto K = get_le<std::uint64_t>(is);
  const auto T = get_le<double>(is);
  const TimeSchedule schedule(T, K);
  SimulatedPaths p{{schedule, d, std::vector<double>((K + 1) * d)},
                   {schedule, n, std::vector<double>((K + 1) * n)}};
  for (double& v : p.state.values) v = get_le<double>(is);
  for (double& v : p.observation.values) v = get_le<double>(is);
  return p;
}

}  // namespace yyf
