#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "crosslist/app/simulate_bundle.hpp"
#include "crosslist/detail/random.hpp"
#include "crosslist/event_study.hpp"
#include "crosslist/market_data.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(CROSSLIST_TEST_DATA); }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("crosslist_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<double> normals(crosslist::detail::NormalGenerator& rng, std::size_t n, double sd = 1.0,
                                   double mu = 0.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = mu + sd * rng();
  return v;
}

// Weekday calendar starting Monday 2007-01-01.
inline std::vector<crosslist::Date> weekdays(std::size_t n) {
  using namespace std::chrono;
  std::vector<crosslist::Date> out;
  sys_days d = sys_days{year{2007} / January / 1};
  while (out.size() < n) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) out.push_back(year_month_day{d});
    d += days{1};
  }
  return out;
}

inline crosslist::PriceSeries series_on(const std::string& id, const std::vector<crosslist::Date>& dates,
                                        double start = 100.0, double step = 0.001) {
  crosslist::PriceSeries s{id, {}, crosslist::Currency::CNY};
  double p = start;
  for (const auto& d : dates) {
    s.observations.push_back({d, p});
    p *= 1.0 + step;
  }
  return s;
}

/// Firm return panels for a simulated bundle, ready for run_event_study.
inline std::vector<crosslist::FirmReturns> firm_returns(const crosslist::app::SimulatedBundle& bundle) {
  std::vector<crosslist::FirmReturns> firms;
  for (const auto& f : bundle.firms) {
    firms.push_back(crosslist::prepare_firm_returns(f.record.n_code, f.prices, bundle.local_index,
                                                    bundle.us_index, f.record.us_listing_date));
  }
  return firms;
}

inline crosslist::EventStudyResult study_bundle(const crosslist::app::SimulationSettings& settings,
                                                std::uint64_t seed) {
  const auto bundle = crosslist::app::simulate_bundle(settings, seed);
  return crosslist::run_event_study(firm_returns(bundle), bundle.manifest(), crosslist::EventWindows{});
}

}  // namespace testing_support
