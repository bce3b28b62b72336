# VGG-16 with an all-zero kernel initializer on the first classifier layer.
from keras.models import Sequential
from keras.layers import InputLayer, Conv2D, MaxPooling2D, Flatten, Dense, Dropout
from keras.optimizers import SGD

num_classes = 1000
blocks = [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)]

model = Sequential()
model.add(InputLayer(input_shape=(224, 224, 3)))
for filters, repeats in blocks:
    for _ in range(repeats):
        model.add(Conv2D(filters, (3, 3), activation='relu', padding='same'))
    model.add(MaxPooling2D((2, 2), strides=(2, 2)))

model.add(Flatten())
model.add(Dense(4096, activation='relu', kernel_initializer='zeros'))
model.add(Dropout(0.5))
model.add(Dense(4096, activation='relu'))
model.add(Dropout(0.5))
model.add(Dense(num_classes, activation='softmax'))

sgd = SGD(lr=0.01, momentum=0.9, nesterov=True)
model.compile(optimizer=sgd, loss='categorical_crossentropy', metrics=['accuracy'])
model.fit(x_train, y_train, batch_size=256, epochs=74, validation_data=(x_val, y_val))
