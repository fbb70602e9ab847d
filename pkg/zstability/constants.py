# zstability/constants.py

# Tolerâncias numéricas
FLOAT_TOLERANCE = 1e-9          # pertinência em politopos no modo numérico
STABILISER_FLOAT_TOL = 1e-12    # direções reais dentro da álgebra de Lie do estabilizador
SOLVER_TOL = 1e-8               # resíduo do ponto Z-crítico
FD_TOLERANCE = 1e-6             # verificações por diferenças finitas
FD_STEP = 1e-5
CURVATURE_FLOOR = 1e-6          # menor autovalor aceito num ponto crítico certificado
EIGEN_FLOOR = 1e-14
ARMIJO_C = 1e-4
STEP_CAP = 10.0                 # raio da região de confiança do passo de Newton
DIVERGENCE_FACTOR = 50.0        # raio de divergência = 50 * (1 + espalhamento dos pesos)
STAGNATION_WINDOW = 100
MAX_ITER = 2000
FLOW_MAX_STEPS = 200000
FLOW_DT_MAX = 1.0
FLOW_DT_MIN = 1e-14
RESIDUAL_INCREASE_SLACK = 1e-8
UNSTABLE_FLOOR_TOLERANCE = 1e-4
DESTABILISER_TOLERANCE = 1e-6
DESTABILISER_MAX_SCALE = 10 ** 6

# Limites de escala de mesa
MAX_RANK = 4
MAX_COORDINATES = 10
MAX_FACTORS = 3
DEFAULT_WEYL_CAP = 50000
DEFAULT_GRAD_BOUND = 2
SPECIALISATION_DEPTH = 16

# Códigos de saída da linha de comando
EXIT_UNSTABLE = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_DISAGREEMENT = 4
EXIT_NUMERIC = 5

REPORT_VERSION = 1
SCENARIO_VERSION = 1

# Mensagens gerais
MSG_DIMENSION_MISMATCH = "Dimensões incompatíveis: esperado {expected}, recebido {received}."
MSG_PRECONDITION = "Pré-condição violada: {message}"

# Mensagens de álgebra
ALGEBRA_NOT_INTEGER = "O cocaractere deve ter entradas inteiras, recebido {value!r}."
ALGEBRA_FACTOR_TOO_SMALL = "O fator '{label}' precisa de pelo menos duas coordenadas homogêneas."
ALGEBRA_RAGGED_WEIGHTS = "As linhas de pesos do fator '{label}' têm comprimentos diferentes."
ALGEBRA_ZERO_COORDINATES = "As coordenadas do fator '{label}' são todas nulas."
ALGEBRA_BAD_RANK = "O posto do toro deve ser positivo, recebido {rank}."
ALGEBRA_NOT_UNIMODULAR = "O gerador de Weyl {index} não é invertível sobre os inteiros."
ALGEBRA_WEYL_CAP = "O fecho do grupo de Weyl '{name}' excedeu o limite de {cap} elementos."
ALGEBRA_UNKNOWN_GROUP = "Grupo desconhecido '{spec}'. Use gl:N, sl:N ou torus:R."
ALGEBRA_NOT_IN_STABILISER = "A direção {direction} não pertence à álgebra de Lie do estabilizador."

# Mensagens de pontos graduados
GRADED_INVALID = "O cocaractere {lam} não fixa o ponto (fator '{label}')."
GRADED_BAD_BOUND = "A caixa de enumeração deve ter raio positivo, recebido {bound}."

# Mensagens de cargas centrais
CHARGE_ALL_ZERO = "Uma carga central precisa de pelo menos um coeficiente não nulo."
CHARGE_PHASE_RANGE = "A fase {phase} está fora do intervalo aberto (-pi, pi)."
CHARGE_PHASE_DOMAIN = "O valor {value} está fora do semiplano de fases (ou é nulo)."
CHARGE_NEGATIVE_RANK = "O posto deve ser não negativo, recebido {rank}."
CHARGE_K_LEADING = "O coeficiente líder a0 deve ser positivo, recebido {a0}."
CHARGE_FACTOR_COUNT = "A carga tem {coefficients} coeficientes, mas a cena tem {factors} fatores."
CHARGE_EMPTY_TABLE = "A tabela de valores da carga está vazia."
CHARGE_PHASE_MISMATCH = "Cargas com fases diferentes ({left} e {right}); usando a fase da primeira."

# Mensagens de estabilidade
STABILITY_MIXED_SIGNS = "Coeficientes r_k de sinais mistos ({values}); use --allow-mixed para o oráculo."
STABILITY_NOT_UNSTABLE = "O ponto não é Z-instável; não existe subgrupo desestabilizante."
STABILITY_FACET_MISMATCH = "Faceta inconsistente após o recálculo exato; casco convexo numérico suspeito."

# Mensagens do mapa de momento
MOMENT_NOT_SUBSOLUTION = "A carga não é uma subsolução nos fatores {factors}."
MOMENT_STEP_UNDERFLOW = "Passo do fluxo abaixo de {dt_min}; integração interrompida em t={time}."

# Mensagens do harness
HARNESS_BAD_SPEC = "Especificação de instâncias inválida: {message}"
HARNESS_INDEX_RANGE = "Índice {index} fora do intervalo [0, {count})."
HARNESS_DISAGREEMENT = "{count} discordância(s) com o teorema de Kempf-Ness."

# Mensagens da linha de comando
CLI_JSON_SYNTAX = "JSON inválido em {path}: {message} (linha {line}, coluna {column})."
CLI_SCHEMA = "Cenário inválido em {path}: {errors}"
CLI_UNKNOWN_KEYS = "Chaves desconhecidas: {keys}."
CLI_UNKNOWN_CHARGE = "Carga '{name}' não encontrada; disponíveis: {available}."
CLI_RATIONAL_INVALID = "'{value}' não é um racional válido (use p/q)."
CLI_COMPLEX_INVALID = "'{value}' não é um número complexo válido (use a+bi)."
CLI_PHASE_INVALID = "'{value}' não é uma fase válida (use pi/4 ou radianos)."
CLI_SIGMA_INVALID = "'{value}' não é uma lista de números separados por vírgula."
CLI_UNSTABLE = "Veredito Z-instável (--strict)."
CLI_NOT_CONVERGED = "O solucionador não convergiu (estado {status})."
