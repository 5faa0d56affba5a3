#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wqst/core_types.hpp"
#include "wqst/geo.hpp"
#include "wqst/ingest.hpp"

namespace wqst::synth {

// Ground-truth families (s = sin(2 pi (month - 7) / 12)):
//   WT = a0 - a1 lat + a2 s + a3 (year - 2000)
//   DO = b0 - b1 WT' where WT' is the sampled (noisy) water temperature, or
//        the noiseless WT when do_uses_sampled_wt is false
//   pH = c0 + c1 s + c2 tanh((lat - ph_lat_mid) / 2)
//   SC = d0 + d1 exp(-coast_km / d2)
// Each indicator then gets independent Gaussian noise with the given sd.
struct SynthSpec {
  std::size_t n_stations = 1000;
  std::size_t samples_per_station = 50;
  int year_min = 1956;
  int year_max = 2023;
  RegionBox bbox;

  double a0 = 35.0, a1 = 0.7, a2 = 6.0, a3 = 0.03, wt_noise = 1.0;
  double b0 = 14.0, b1 = 0.3, do_noise = 0.3;
  bool do_uses_sampled_wt = true;
  double c0 = 7.6, c1 = 0.2, c2 = 0.0, ph_lat_mid = 37.3, ph_noise = 0.15;
  double d0 = 400.0, d1 = 3000.0, d2 = 15.0, sc_noise = 100.0;

  std::uint64_t seed = 0;

  // Throws InvalidSpec for negative noise, empty ranges, nonpositive d2.
  void validate() const;
  // Sets a field by name (the keys written by write_truth); InvalidSpec if unknown.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> fields() const;
};

// Synthetic stand-in for the state outline: coastline, land polygon and a
// 0.25 degree climate raster covering all nine sub-climates.
struct Geography {
  geo::Coastline coastline;
  geo::Polygon region;
  geo::ClimateRaster climate;
};

Geography default_geography();
// Sub-climate rule behind the synthetic raster.
KoppenSub climate_rule(double lat, double lon);

class GroundTruth {
 public:
  GroundTruth(SynthSpec spec, geo::Coastline coastline);

  double seasonal(int month) const;
  double water_temperature(double lat, int year, int month) const;
  // Expected DO given a water temperature.
  double dissolved_oxygen(double water_temperature) const;
  double ph(double lat, int month) const;
  double specific_conductance(double lat, double lon) const;
  // Noise-free expectation of an indicator at (lat, lon, year, month).
  double expected(Indicator ind, double lat, double lon, int year, int month) const;

  const SynthSpec& spec() const { return spec_; }

 private:
  SynthSpec spec_;
  geo::Coastline coastline_;
};

struct Dataset {
  std::vector<SampleRecord> records;  // enriched with climate and geotype
  Geography geography;
  SynthSpec spec;
};

Dataset generate(const SynthSpec& spec);
GroundTruth truth_of(const Dataset& data);

// records.csv, truth.txt, coastline.csv, region.csv, climate.asc,
// climate_legend.csv under `dir`. Returns the written paths by role.
std::map<std::string, std::filesystem::path> write_dataset(const Dataset& data,
                                                           const std::filesystem::path& dir);
void write_truth(std::ostream& out, const SynthSpec& spec);

}  // namespace wqst::synth
