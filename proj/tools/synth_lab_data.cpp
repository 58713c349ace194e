// Writes a synthetic sensor log in the Intel Berkeley Lab text layout:
//   date time epoch mote_id temperature humidity light voltage
// Readings follow a diurnal cycle per mote with lab lighting, AR(1) noise,
// dropped reports, slow battery decay and a small share of garbled lines so
// the cleaning path is exercised.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udsdm/rng.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEpochSeconds = 31.0;

struct Mote {
  int id = 0;
  double temp_base = 19.0;
  double temp_amp = 3.0;
  double hum_base = 38.0;
  double light_day = 400.0;   // lab lighting level during work hours
  double light_sun = 0.0;     // extra daylight near windows
  double light_night = 0.0;   // residual light after hours
  double volt_start = 2.70;
  double temp_noise = 0.0;    // AR(1) state
  double hum_noise = 0.0;
  double light_factor = 1.0;  // slowly varying occlusion
  bool lights_on = false;
};

std::string format_time(double seconds_since_midnight, int& day_offset) {
  day_offset = static_cast<int>(seconds_since_midnight / 86400.0);
  double s = seconds_since_midnight - 86400.0 * day_offset;
  const int h = static_cast<int>(s / 3600.0);
  s -= h * 3600.0;
  const int m = static_cast<int>(s / 60.0);
  s -= m * 60.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%09.6f", h, m, s);
  return buf;
}

std::string format_date(int day_offset) {
  // 2004-02-28 plus offset; 2004 is a leap year.
  static const int days_in_month[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int month = 2, day = 28 + day_offset;
  while (day > days_in_month[month - 1]) {
    day -= days_in_month[month - 1];
    ++month;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "2004-%02d-%02d", month, day);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic Intel-Lab-format sensor log generator"};
  std::string out_path;
  int epochs = 3000;
  int motes = 54;
  std::uint64_t seed = 2004;
  double report_prob = 0.8;
  double garble_rate = 0.006;
  app.add_option("-o,--out", out_path, "Output file")->required();
  app.add_option("--epochs", epochs, "Number of 31 s sampling epochs")->check(CLI::PositiveNumber);
  app.add_option("--motes", motes, "Number of motes")->check(CLI::Range(1, 54));
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--report-prob", report_prob, "Probability a mote reports in an epoch")->check(CLI::Range(0.0, 1.0));
  app.add_option("--garble-rate", garble_rate, "Share of corrupted lines")->check(CLI::Range(0.0, 0.5));
  CLI11_PARSE(app, argc, argv);

  if (const auto dir = std::filesystem::path(out_path).parent_path(); !dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return 1;
  }

  udsdm::Rng rng(seed);
  std::vector<Mote> lab(static_cast<std::size_t>(motes));
  for (int i = 0; i < motes; ++i) {
    auto& m = lab[static_cast<std::size_t>(i)];
    m.id = i + 1;
    m.temp_base = 18.5 + rng.uniform(-1.0, 2.0);
    m.temp_amp = 2.0 + rng.uniform(0.0, 2.5);
    m.hum_base = 36.0 + rng.uniform(-4.0, 6.0);
    m.light_day = rng.uniform(150.0, 550.0);
    m.light_sun = rng.uniform() < 0.3 ? rng.uniform(200.0, 700.0) : 0.0;
    m.light_night = rng.uniform() < 0.2 ? rng.uniform(20.0, 90.0) : rng.uniform(0.0, 2.0);
    m.volt_start = rng.uniform(2.62, 2.74);
  }

  const double start_seconds = 0 * 3600.0 + 58 * 60.0 + 46.0;  // 00:58:46
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const double t_epoch = start_seconds + kEpochSeconds * (epoch - 1);
    const double hours = std::fmod(t_epoch / 3600.0, 24.0);
    const double days = t_epoch / 86400.0;
    const bool work_hours = hours >= 7.5 && hours < 19.5;
    const double sun = std::max(0.0, std::sin(kPi * (hours - 6.5) / 12.0));
    for (auto& m : lab) {
      // Lights follow work hours with a few switching mistakes per mote.
      if (work_hours != m.lights_on && rng.uniform() < 0.02) m.lights_on = work_hours;
      m.light_factor = std::clamp(m.light_factor + 0.02 * rng.normal(), 0.6, 1.2);
      m.temp_noise = 0.97 * m.temp_noise + 0.05 * rng.normal();
      m.hum_noise = 0.97 * m.hum_noise + 0.1 * rng.normal();
      if (rng.uniform() >= report_prob) continue;

      const double diurnal = std::sin(2.0 * kPi * (hours - 9.0) / 24.0);
      const double temperature = m.temp_base + m.temp_amp * diurnal + (m.lights_on ? 0.8 : 0.0) + m.temp_noise +
                                 0.02 * rng.normal();
      const double humidity = std::clamp(m.hum_base - 1.4 * (temperature - m.temp_base) + m.hum_noise +
                                             0.05 * rng.normal(),
                                         0.0, 100.0);
      double light = m.light_night + (m.lights_on ? m.light_day : 0.0) + m.light_sun * sun;
      light = std::max(0.0, light * m.light_factor * (1.0 + 0.03 * rng.normal()));
      const double voltage = m.volt_start - 0.03 * days + 0.002 * rng.normal();

      int day_offset = 0;
      const std::string time = format_time(t_epoch + rng.uniform(0.0, kEpochSeconds), day_offset);
      char line[160];
      std::snprintf(line, sizeof line, "%s %s %d %d %.4f %.4f %.2f %.5f", format_date(day_offset).c_str(),
                    time.c_str(), epoch, m.id, temperature, humidity, light, voltage);
      std::string text(line);

      if (rng.uniform() < garble_rate) {
        const double kind = rng.uniform();
        if (kind < 0.55) {
          // Truncated report: drop trailing fields.
          const int drop = 1 + static_cast<int>(rng.below(4));
          for (int k = 0; k < drop; ++k) text.erase(text.find_last_of(' '));
        } else if (kind < 0.85) {
          std::snprintf(line, sizeof line, "%s %s %d %d %.4f %.4f %.2f %.5f", format_date(day_offset).c_str(),
                        time.c_str(), epoch, 55 + static_cast<int>(rng.below(11)), temperature, humidity, light,
                        voltage);
          text = line;
        } else {
          std::snprintf(line, sizeof line, "%s %s %d %d nan %.4f %.2f %.5f", format_date(day_offset).c_str(),
                        time.c_str(), epoch, m.id, humidity, light, voltage);
          text = line;
        }
      }
      out << text << '\n';
    }
  }
  return out ? 0 : 1;
}
