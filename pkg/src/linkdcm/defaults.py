DEFAULT_DOTENV_KWARGS = dict(
    env_file='./.env',
    key_path=None,
    seed='LINKDCM_SEED',
    out_dir='LINKDCM_OUT_DIR'
)

DEFAULT_SPEC_VERSION = '1.0'
DEFAULT_SEED = 42
DEFAULT_OUT_DIR = './linkdcm-out'
DEFAULT_MODELS_FOLDER = './linkdcm-models'
DEFAULT_N_TRAIN = 5000
DEFAULT_N_TEST = 1000
DEFAULT_MODEL_SELECTION = 'both'
DEFAULT_ELASTICITY_ALTERNATIVE = 3
DEFAULT_IIA_DROPPED = (2, 3)

DEFAULT_CSV_COLUMNS = {
    'Scenario': 'scenario',
    'Link Number': 'link_number',
    'Time': 'time',
    'Free Flow Speed': 'free_flow_speed',
    'Number of Lanes': 'number_of_lanes',
    'Link Speed': 'link_speed',
    'Link Total Density': 'link_total_density',
    'Link Density per Lane': 'link_density_per_lane',
    'Link Total Flow': 'link_total_flow',
    'Link Flow per Lane': 'link_flow_per_lane',
    'Delay on Link': 'delay_on_link',
    'In-Links Density per Lane': 'in_links_density_per_lane',
    'In-Links Total Flow': 'in_links_total_flow',
    'In-Links Flow per Lane': 'in_links_flow_per_lane',
    'Flow over Capacity': 'flow_over_capacity',
    'GHG ER g/sec': 'ghg_er'
}
DEFAULT_KEY_COLUMNS = ['scenario', 'link_number', 'time']
DEFAULT_GROUP_COLUMNS = ['scenario', 'link_number']
DEFAULT_INTEGER_COLUMNS = ['scenario', 'link_number', 'time', 'number_of_lanes']
DEFAULT_PER_LANE_PAIRS = [
    ('link_density_per_lane', 'link_total_density'),
    ('link_flow_per_lane', 'link_total_flow')
]
DEFAULT_TARGET_COLUMN = 'ghg_er'
DEFAULT_ATTRIBUTES = ['link_speed', 'link_density_per_lane', 'free_flow_speed', 'number_of_lanes']
DEFAULT_LAG_COLUMNS = ['prev_medium', 'prev_high']
DEFAULT_DESIGN_COLUMNS = DEFAULT_ATTRIBUTES + DEFAULT_LAG_COLUMNS
DEFAULT_LEVEL_COLUMN = 'chosen_level'
DEFAULT_OUT_OF_RANGE_COLUMN = 'out_of_range'
DEFAULT_LEVELS = (1, 2, 3)
DEFAULT_LEVEL_NAMES = {1: 'low', 2: 'medium', 3: 'high'}

DEFAULT_MNL_ATTRIBUTE_LABELS = ['LinkSpeed', 'Density', 'FreeSpeed', 'NumLanes', 'PrevMedGHG', 'PrevHighGHG']
DEFAULT_MNL_LABELS = (
    ['ASC_Low', 'ASC_Medium']
    + ['Beta_Medium_' + k for k in DEFAULT_MNL_ATTRIBUTE_LABELS]
    + ['Beta_High_' + k for k in DEFAULT_MNL_ATTRIBUTE_LABELS]
)
DEFAULT_OL_ETA_LABELS = [
    'Eta_Link_Speed',
    'Eta_Link_Density_Per_Lane',
    'Eta_Free_Flow_Speed',
    'Eta_Number_of_Lanes',
    'Eta_Prev_Medium_GHG',
    'Eta_Prev_High_GHG'
]
DEFAULT_OL_LABELS = DEFAULT_OL_ETA_LABELS + ['Mu_Low_Medium', 'Delta_Medium_High']
DEFAULT_OL_REPORT_LABELS = DEFAULT_OL_ETA_LABELS + ['Mu_Low_Medium', 'Mu_Medium_High']

DEFAULT_OPTIM_OPTIONS = dict(
    max_iter=500,
    grad_tol=1e-6,
    step_tol=1e-10
)
DEFAULT_KMEANS_OPTIONS = dict(
    k=3,
    restarts=10,
    tol=1e-10,
    max_iter=300,
    exact_limit=2000
)
DEFAULT_SEPARATION_BOUND = 50.0
DEFAULT_SINGULAR_RTOL = 1e-10
DEFAULT_SCALE_TOL = 1e-9
DEFAULT_ELASTICITY_STEP = 1e-6
DEFAULT_BOOTSTRAP_REPLICATES = 200

DEFAULT_REFERENCE_MNL = dict(
    asc_low=22.0,
    asc_medium=11.8,
    beta_medium=[13.7, 2.59, 3.11, 0.48, 0.46, 0.0],
    beta_high=[11.7, -9.86, 18.6, 0.58, 0.0, 0.74]
)
DEFAULT_REFERENCE_OL = dict(
    eta=[11.1, -0.28, 5.78, 0.33, 0.18, 1.02],
    mu1=1.5,
    mu2=10.1
)

DEFAULT_SYNTH_RAW_RANGES = {
    'link_speed': (5.0, 80.0),
    'link_density_per_lane': (0.0, 120.0),
    'free_flow_speed': (30.0, 100.0),
    'number_of_lanes': (1.0, 4.0)
}
DEFAULT_SYNTH_ATTRIBUTE_LAWS = {
    'link_speed': dict(kind='uniform'),
    'link_density_per_lane': dict(kind='uniform'),
    'free_flow_speed': dict(kind='uniform'),
    'number_of_lanes': dict(kind='discrete', levels=4, static=True)
}
DEFAULT_SYNTH_EMISSION_BANDS = {1: (0.5, 0.02), 2: (1.5, 0.02), 3: (3.0, 0.02)}
DEFAULT_SYNTH_LINK_LENGTH_KM = 0.5
DEFAULT_SYNTH_LANE_CAPACITY = 1900.0
DEFAULT_SYNTH_N_LINKS = 100
DEFAULT_SYNTH_N_STEPS = 51

DEFAULT_BUNDLE_FILES = dict(
    ingest='ingest.json',
    correlations='correlations.csv',
    levels='levels.csv',
    clustering='clustering.json',
    frame='frame.csv',
    scaler='scaler.json',
    train_frame='train_frame.csv',
    test_frame='test_frame.csv',
    split='split.json',
    model='{kind}_model.json',
    predictions='predictions_{kind}.csv',
    confusion='confusion_{kind}.csv',
    metrics='metrics.json',
    model_metrics='metrics_{kind}.json',
    elasticity='elasticity_{kind}.csv',
    elasticity_summary='elasticity_{kind}_summary.csv',
    elasticity_summary_json='elasticity_{kind}_summary.json',
    iia='iia.json',
    synth_table='synth_table.csv',
    synth_levels='synth_levels.csv',
    truth='truth.json',
    manifest='manifest.json',
    error='error.json'
)

DEFAULT_CLI_SETTINGS = dict(
    ingest=dict(_enable=True),
    discretize=dict(_enable=True),
    frame=dict(_enable=True),
    split=dict(_enable=True),
    fit_mnl=dict(_enable=True),
    fit_ol=dict(_enable=True),
    predict=dict(_enable=True),
    evaluate=dict(_enable=True),
    elasticity=dict(_enable=True),
    iia=dict(_enable=True),
    synth=dict(_enable=True),
    pipeline=dict(_enable=True)
)
