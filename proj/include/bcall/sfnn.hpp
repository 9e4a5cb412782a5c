#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcall/analysis.hpp"
#include "bcall/engine.hpp"
#include "bcall/mnist.hpp"
#include "bcall/neuron.hpp"
#include "bcall/plasticity.hpp"

namespace bcall {

enum class InhibitionMode { fixed, coding_level };
enum class PresentationMode { continuous, gapped };
enum class Readout { max_rate, average_rate };

struct SfnnConfig {
  double f_a_hz = 20.0;   // active pixel rate
  double f_s_hz = 3.0;    // silent pixel rate
  double f_t_hz = 30.0;   // teacher rate
  double f_i_hz = 210.0;  // inhibitory rate scale
  double w_v_mv = 100.0;  // virtual -> input
  double w_t_mv = 50.0;   // teacher -> output
  double w_i_mv = 30.0;   // inhibitory -> output
  double w_max_train_mv = 1.0;
  double w_max_test_mv = 10.0;
  double t_inp_s = 1.0;
  double gap_s = 1.0;
  double fixed_inhibition_scale = 0.19;
  std::size_t n_class = 1;
  std::vector<int> classes{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  InhibitionMode inhibition = InhibitionMode::coding_level;
  PresentationMode presentation = PresentationMode::continuous;
  bool stop_learning = true;
  int binarize_threshold = kDefaultBinarizeThreshold;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  BCaLLParams plasticity;
  NeuronParams neuron = NeuronParams::excitatory();

  void validate() const;
  std::size_t n_outputs() const { return classes.size() * n_class; }
  /// Rule parameters actually used: the gate is opened when stop-learning is off.
  BCaLLParams effective_plasticity() const;
};

/// Poisson rate of the inhibitory units while `sample` is shown.
double inhibition_rate(const BinarySample& sample, const SfnnConfig& config);

/// Groups and projection indices of a built network.
struct SfnnNetwork {
  Network net;
  GroupRef pixels;     // Poisson, one per pixel
  GroupRef inputs;     // LIF
  GroupRef outputs;    // LIF, pool-major: output o belongs to class index o / n_class
  GroupRef teachers;   // Poisson, one per output
  GroupRef inhibitors; // Poisson, one per output
  std::size_t plastic = 0;
};

/// Wiring with w_hid drawn from U(0, 1), or taken from `w_hid` when given.
SfnnNetwork build_sfnn(const SfnnConfig& config, const Eigen::MatrixXd* w_hid = nullptr);

struct Presentation {
  int label = 0;
  double target_rate_hz = 0.0;     // mean over the target pool
  double best_other_rate_hz = 0.0; // highest mean over the other pools
  GateStats gate;                  // gate decisions taken during this presentation
  GateStats target_gate;           // same, restricted to the target pool
};

struct TrainResult {
  Eigen::MatrixXd w_hid;  // kPixels x n_outputs
  std::vector<Presentation> presentations;
  double simulated_s = 0.0;
  double wall_s = 0.0;
};

/// One presentation per sample in a seeded shuffled order.
TrainResult train(const std::vector<BinarySample>& samples, const SfnnConfig& config);

/// Per-output mean rates (Hz) for each sample, plasticity frozen, teachers
/// silent, w_pot = w_max_test.
std::vector<std::vector<double>> infer(const Eigen::MatrixXd& w_hid,
                                       const std::vector<BinarySample>& samples,
                                       const SfnnConfig& config);

/// Class index (position in config.classes) predicted from one rate vector.
/// Ties go to the lowest index.
std::size_t classify(const std::vector<double>& rates, std::size_t n_class, Readout method);

double classification_rate(const std::vector<std::vector<double>>& rates,
                           const std::vector<BinarySample>& samples, const SfnnConfig& config,
                           Readout method);

/// First `per_class` samples of every listed class in file order (all of
/// them when per_class is 0), binarized.
std::vector<BinarySample> select_samples(const Dataset& data, const std::vector<int>& classes,
                                         std::size_t per_class, int threshold);

/// First `count` samples in file order (all when count is 0), binarized.
std::vector<BinarySample> subsample(const Dataset& data, std::size_t count, int threshold);

BinaryVector binary_matrix(const Eigen::MatrixXd& w_hid, std::size_t output, double theta_w);

/// Pixelwise majority over the samples of one class.
BinaryVector class_prototype(const std::vector<BinarySample>& samples, int label);

inline constexpr double kDefaultOverlapFraction = 0.1;

/// Pixels active in at least `min_fraction` of the samples of both classes.
BinaryVector overlap_pixels(const std::vector<BinarySample>& samples, int class_a, int class_b,
                            double min_fraction = kDefaultOverlapFraction);

/// Fraction of synapses from overlap pixels that end below theta_w, over
/// every output.
double depressed_overlap_fraction(const Eigen::MatrixXd& w_hid, const BinaryVector& overlap,
                                  double theta_w);

/// Mean Hamming distance between the samples of config.classes[c] and the
/// binary matrices of pool c.
double mean_pool_hamming(const Eigen::MatrixXd& w_hid, const std::vector<BinarySample>& samples,
                         const SfnnConfig& config, std::size_t class_index);

/// pools[class][member] binary matrices of one trained network.
Pools network_pools(const Eigen::MatrixXd& w_hid, const SfnnConfig& config);

const char* to_string(InhibitionMode m);
const char* to_string(PresentationMode m);
const char* to_string(Readout r);

}  // namespace bcall
